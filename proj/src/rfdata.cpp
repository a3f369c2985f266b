#include "rffw/rfdata.hpp"

#include "rffw/common.hpp"
#include "rffw/hash.hpp"
#include "rffw/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

namespace rffw {

namespace {

constexpr uint64_t kSaltProfile = 0x01;
constexpr uint64_t kSaltDevSeed = 0x02;
constexpr uint64_t kSaltFrame = 0x03;
constexpr uint64_t kSaltSnr = 0x04;
constexpr uint64_t kSaltSplit = 0x05;
constexpr uint64_t kSaltPhaseNoise = 0x06;
constexpr uint64_t kSaltAwgn = 0x07;
constexpr uint64_t kSaltSample = 0x08;

constexpr double kRrcBeta = 0.35;
constexpr int kRrcSpanSymbols = 8;

void check_range(const char* name, double lo, double hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi)))
        throw ConfigError(std::string("impairment range not finite: ") + name);
    if (lo > hi) throw ConfigError(std::string("inverted impairment range: ") + name);
}

} // namespace

void ImpairmentRanges::validate() const {
    check_range("gain_imb_db", gain_imb_db_min, gain_imb_db_max);
    check_range("phase_imb_rad", phase_imb_rad_min, phase_imb_rad_max);
    check_range("cfo", cfo_min, cfo_max);
    check_range("dc", dc_min, dc_max);
    check_range("phase_noise_std", phase_noise_std_min, phase_noise_std_max);
    if (phase_noise_std_min < 0.0) throw ConfigError("phase noise std must be >= 0");
    check_range("cubic", cubic_min, cubic_max);
}

KvMap ImpairmentRanges::to_kv() const {
    KvMap m;
    m["range.gain_db"] = format_double(gain_imb_db_min) + ".." + format_double(gain_imb_db_max);
    m["range.phase_rad"] = format_double(phase_imb_rad_min) + ".." + format_double(phase_imb_rad_max);
    m["range.cfo"] = format_double(cfo_min) + ".." + format_double(cfo_max);
    m["range.dc"] = format_double(dc_min) + ".." + format_double(dc_max);
    m["range.pn_std"] = format_double(phase_noise_std_min) + ".." + format_double(phase_noise_std_max);
    m["range.cubic"] = format_double(cubic_min) + ".." + format_double(cubic_max);
    return m;
}

std::vector<size_t> RfDataset::positions_of(Split s) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < frames.size(); ++i)
        if (split_of(i) == s) out.push_back(i);
    return out;
}

std::vector<size_t> RfDataset::positions_of(Split s, uint16_t label) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < frames.size(); ++i)
        if (split_of(i) == s && frames[i].device_label == label) out.push_back(i);
    return out;
}

std::vector<DeviceProfile> make_device_profiles(int num_devices, uint64_t master_seed,
                                                const ImpairmentRanges& r) {
    if (num_devices < 1) throw ConfigError("empty request: num_devices must be >= 1");
    r.validate();

    for (uint64_t attempt = 0;; ++attempt) {
        std::vector<DeviceProfile> out;
        out.reserve(num_devices);
        for (int d = 0; d < num_devices; ++d) {
            Rng rng(derive_seed(master_seed, {kSaltProfile, static_cast<uint64_t>(d), attempt}));
            DeviceProfile p;
            p.device_index = d;
            p.iq_gain_imbalance_db = rng.uniform(r.gain_imb_db_min, r.gain_imb_db_max);
            p.iq_phase_imbalance_rad = rng.uniform(r.phase_imb_rad_min, r.phase_imb_rad_max);
            p.cfo_norm = rng.uniform(r.cfo_min, r.cfo_max);
            p.dc_offset_i = rng.uniform(r.dc_min, r.dc_max);
            p.dc_offset_q = rng.uniform(r.dc_min, r.dc_max);
            p.phase_noise_std_rad = rng.uniform(r.phase_noise_std_min, r.phase_noise_std_max);
            p.pa_cubic_coeff = rng.uniform(r.cubic_min, r.cubic_max);
            p.seed = derive_seed(master_seed, {kSaltDevSeed, static_cast<uint64_t>(d)});
            out.push_back(p);
        }
        bool distinct = true;
        for (size_t a = 0; a < out.size() && distinct; ++a) {
            for (size_t b = a + 1; b < out.size() && distinct; ++b) {
                const auto &x = out[a], &y = out[b];
                if (x.iq_gain_imbalance_db == y.iq_gain_imbalance_db &&
                    x.iq_phase_imbalance_rad == y.iq_phase_imbalance_rad &&
                    x.cfo_norm == y.cfo_norm && x.dc_offset_i == y.dc_offset_i &&
                    x.dc_offset_q == y.dc_offset_q &&
                    x.phase_noise_std_rad == y.phase_noise_std_rad &&
                    x.pa_cubic_coeff == y.pa_cubic_coeff)
                    distinct = false;
            }
        }
        if (distinct) return out;
        // All fields pinned makes duplicates legitimate; no retry will fix that.
        bool all_pinned = r.gain_imb_db_min == r.gain_imb_db_max &&
                          r.phase_imb_rad_min == r.phase_imb_rad_max && r.cfo_min == r.cfo_max &&
                          r.dc_min == r.dc_max && r.phase_noise_std_min == r.phase_noise_std_max &&
                          r.cubic_min == r.cubic_max;
        if (all_pinned) throw ConfigError("all impairment ranges pinned: profiles cannot be distinct");
    }
}

std::vector<double> pulse_kernel() {
    const int sps = kSamplesPerSymbol;
    const int half = kRrcSpanSymbols * sps / 2;
    std::vector<double> h(2 * half + 1);
    const double beta = kRrcBeta;
    for (int n = -half; n <= half; ++n) {
        double t = static_cast<double>(n) / sps; // in symbol periods
        double v;
        if (n == 0) {
            v = 1.0 + beta * (4.0 / M_PI - 1.0);
        } else if (std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
            v = (beta / std::sqrt(2.0)) *
                ((1.0 + 2.0 / M_PI) * std::sin(M_PI / (4.0 * beta)) +
                 (1.0 - 2.0 / M_PI) * std::cos(M_PI / (4.0 * beta)));
        } else {
            double num = std::sin(M_PI * t * (1.0 - beta)) +
                         4.0 * beta * t * std::cos(M_PI * t * (1.0 + beta));
            double den = M_PI * t * (1.0 - 16.0 * beta * beta * t * t);
            v = num / den;
        }
        h[n + half] = v;
    }
    double peak = h[half];
    for (double& v : h) v /= peak;
    return h;
}

int symbols_needed(int frame_len) {
    const int klen = kRrcSpanSymbols * kSamplesPerSymbol + 1;
    return (frame_len + klen - 1 + kSamplesPerSymbol - 1) / kSamplesPerSymbol;
}

void make_qpsk_symbols(uint64_t seed, int count, std::vector<double>& si, std::vector<double>& sq) {
    si.resize(count);
    sq.resize(count);
    Rng rng(seed);
    const double a = 1.0 / std::sqrt(2.0);
    for (int k = 0; k < count; ++k) {
        uint64_t bits = rng.next_u64();
        si[k] = (bits & 1) ? a : -a;
        sq[k] = (bits & 2) ? a : -a;
    }
}

void pulse_shape(const std::vector<double>& si, const std::vector<double>& sq, int frame_len,
                 std::vector<double>& out_i, std::vector<double>& out_q) {
    const auto h = pulse_kernel();
    const int klen = static_cast<int>(h.size());
    const int sps = kSamplesPerSymbol;
    const int nsym = static_cast<int>(si.size());
    if (nsym < symbols_needed(frame_len)) throw DataError("not enough symbols for frame length");
    out_i.assign(frame_len, 0.0);
    out_q.assign(frame_len, 0.0);
    // y[n] over the fully-covered region, offset by klen-1
    for (int t = 0; t < frame_len; ++t) {
        int n = t + klen - 1;
        double ai = 0.0, aq = 0.0;
        // nonzero upsampled taps sit at multiples of sps
        int s_lo = (n - klen + 1 + sps - 1) / sps;
        int s_hi = n / sps;
        if (s_hi >= nsym) s_hi = nsym - 1;
        if (s_lo < 0) s_lo = 0;
        for (int s = s_lo; s <= s_hi; ++s) {
            double hv = h[n - s * sps];
            ai += hv * si[s];
            aq += hv * sq[s];
        }
        out_i[t] = ai;
        out_q[t] = aq;
    }
}

void normalize_power(IqFrame& f) {
    double p = 0.0;
    for (size_t k = 0; k < f.len(); ++k)
        p += static_cast<double>(f.i_samples[k]) * f.i_samples[k] +
             static_cast<double>(f.q_samples[k]) * f.q_samples[k];
    p /= static_cast<double>(f.len());
    if (!(p > 0.0)) throw DataError("cannot normalize zero-power frame");
    double s = 1.0 / std::sqrt(p);
    for (size_t k = 0; k < f.len(); ++k) {
        f.i_samples[k] = static_cast<float>(f.i_samples[k] * s);
        f.q_samples[k] = static_cast<float>(f.q_samples[k] * s);
    }
}

IqFrame gen_frame_from_symbols(const DeviceProfile& p, const std::vector<double>& si,
                               const std::vector<double>& sq, uint64_t noise_seed, double snr_db,
                               int frame_len, const GenOptions& opts) {
    if (frame_len < 16) throw ConfigError("frame_len must be >= 16");
    if (!std::isfinite(snr_db)) throw ConfigError("snr_db must be finite");

    std::vector<double> di, dq;
    pulse_shape(si, sq, frame_len, di, dq);

    // impairment chain: DC -> IQ imbalance -> CFO -> cubic PA -> phase noise
    for (int t = 0; t < frame_len; ++t) {
        di[t] += p.dc_offset_i;
        dq[t] += p.dc_offset_q;
    }
    const double gi = std::pow(10.0, p.iq_gain_imbalance_db / 40.0);
    const double gq = std::pow(10.0, -p.iq_gain_imbalance_db / 40.0);
    const double cphi = std::cos(p.iq_phase_imbalance_rad);
    const double sphi = std::sin(p.iq_phase_imbalance_rad);
    for (int t = 0; t < frame_len; ++t) {
        double i0 = di[t], q0 = dq[t];
        di[t] = gi * i0;
        dq[t] = gq * (q0 * cphi + i0 * sphi);
    }
    for (int t = 0; t < frame_len; ++t) {
        double ang = 2.0 * M_PI * p.cfo_norm * t;
        double c = std::cos(ang), s = std::sin(ang);
        double i0 = di[t], q0 = dq[t];
        di[t] = i0 * c - q0 * s;
        dq[t] = i0 * s + q0 * c;
    }
    for (int t = 0; t < frame_len; ++t) {
        double m = di[t] * di[t] + dq[t] * dq[t];
        double g = 1.0 + p.pa_cubic_coeff * m;
        di[t] *= g;
        dq[t] *= g;
    }
    if (p.phase_noise_std_rad > 0.0) {
        Rng pn(derive_seed(p.seed, {kSaltPhaseNoise, noise_seed}));
        for (int t = 0; t < frame_len; ++t) {
            double th = p.phase_noise_std_rad * pn.normal();
            double c = std::cos(th), s = std::sin(th);
            double i0 = di[t], q0 = dq[t];
            di[t] = i0 * c - q0 * s;
            dq[t] = i0 * s + q0 * c;
        }
    }
    if (opts.noise_enabled) {
        double psig = 0.0;
        for (int t = 0; t < frame_len; ++t) psig += di[t] * di[t] + dq[t] * dq[t];
        psig /= frame_len;
        double nvar = psig * std::pow(10.0, -snr_db / 10.0);
        double nstd = std::sqrt(nvar / 2.0); // split across I and Q
        Rng awgn(derive_seed(p.seed, {kSaltAwgn, noise_seed}));
        for (int t = 0; t < frame_len; ++t) {
            di[t] += nstd * awgn.normal();
            dq[t] += nstd * awgn.normal();
        }
    }

    // unit average power across both channels jointly, before the f32 cast
    double pw = 0.0;
    for (int t = 0; t < frame_len; ++t) pw += di[t] * di[t] + dq[t] * dq[t];
    pw /= frame_len;
    if (!(pw > 0.0)) throw DataError("generated frame has zero power");
    double scale = 1.0 / std::sqrt(pw);

    IqFrame f;
    f.i_samples.resize(frame_len);
    f.q_samples.resize(frame_len);
    for (int t = 0; t < frame_len; ++t) {
        f.i_samples[t] = static_cast<float>(di[t] * scale);
        f.q_samples[t] = static_cast<float>(dq[t] * scale);
    }
    f.device_label = static_cast<uint16_t>(p.device_index);
    f.snr_db = static_cast<float>(snr_db);
    return f;
}

IqFrame gen_frame(const DeviceProfile& profile, uint64_t payload_seed, double snr_db,
                  int frame_len, const GenOptions& opts) {
    if (frame_len < 16) throw ConfigError("frame_len must be >= 16");
    std::vector<double> si, sq;
    make_qpsk_symbols(payload_seed, symbols_needed(frame_len), si, sq);
    return gen_frame_from_symbols(profile, si, sq, payload_seed, snr_db, frame_len, opts);
}

RfDataset gen_dataset(const GenParams& p) {
    if (p.num_devices < 2) throw ConfigError("gen_dataset requires num_devices >= 2");
    if (p.frames_per_device < 10) throw ConfigError("gen_dataset requires frames_per_device >= 10");
    if (!(std::isfinite(p.snr_lo_db) && std::isfinite(p.snr_hi_db)) || p.snr_lo_db > p.snr_hi_db)
        throw ConfigError("invalid snr range");
    auto profiles = make_device_profiles(p.num_devices, p.master_seed, p.ranges);

    RfDataset ds;
    ds.num_devices = p.num_devices;
    ds.num_classes = p.num_devices;
    ds.frame_len = static_cast<uint32_t>(p.frame_len);
    ds.master_seed = p.master_seed;
    ds.frames.reserve(static_cast<size_t>(p.num_devices) * p.frames_per_device);
    for (int d = 0; d < p.num_devices; ++d) {
        for (int k = 0; k < p.frames_per_device; ++k) {
            uint64_t payload_seed =
                derive_seed(p.master_seed, {kSaltFrame, static_cast<uint64_t>(d), static_cast<uint64_t>(k)});
            Rng snr_rng(derive_seed(p.master_seed,
                                    {kSaltSnr, static_cast<uint64_t>(d), static_cast<uint64_t>(k)}));
            double snr = snr_rng.uniform(p.snr_lo_db, p.snr_hi_db);
            IqFrame f = gen_frame(profiles[d], payload_seed, snr, p.frame_len);
            f.frame_id = static_cast<uint32_t>(d * p.frames_per_device + k);
            ds.frames.push_back(std::move(f));
        }
    }
    ds.manifest["generator"] = "rffw-sim-v1";
    ds.manifest["master_seed"] = std::to_string(p.master_seed);
    ds.manifest["num_devices"] = std::to_string(p.num_devices);
    ds.manifest["frames_per_device"] = std::to_string(p.frames_per_device);
    ds.manifest["frame_len"] = std::to_string(p.frame_len);
    ds.manifest["snr_lo_db"] = format_double(p.snr_lo_db);
    ds.manifest["snr_hi_db"] = format_double(p.snr_hi_db);
    for (const auto& [k, v] : p.ranges.to_kv()) ds.manifest[k] = v;
    return ds;
}

RfDataset split_dataset(RfDataset ds, const SplitRatios& ratios, uint64_t seed) {
    const double sum = ratios.train + ratios.val + ratios.test;
    if (ratios.train <= 0.0 || ratios.val <= 0.0 || ratios.test <= 0.0)
        throw ConfigError("split ratios must all be > 0");
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

    ds.split.assign(ds.frames.size(), Split::Train);
    for (int c = 0; c < ds.num_classes; ++c) {
        std::vector<size_t> pos;
        for (size_t i = 0; i < ds.frames.size(); ++i)
            if (ds.frames[i].device_label == c) pos.push_back(i);
        if (pos.empty()) continue;
        Rng rng(derive_seed(seed, {kSaltSplit, static_cast<uint64_t>(c)}));
        for (size_t i = pos.size() - 1; i > 0; --i) {
            size_t j = rng.below(i + 1);
            std::swap(pos[i], pos[j]);
        }
        const size_t n = pos.size();
        const double r[3] = {ratios.train, ratios.val, ratios.test};
        size_t cnt[3];
        double frac[3];
        size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            double exact = r[s] * static_cast<double>(n);
            cnt[s] = static_cast<size_t>(std::floor(exact));
            frac[s] = exact - static_cast<double>(cnt[s]);
            assigned += cnt[s];
        }
        int order[3] = {0, 1, 2};
        std::sort(order, order + 3, [&](int a, int b) {
            if (frac[a] != frac[b]) return frac[a] > frac[b];
            return a < b;
        });
        for (size_t rem = n - assigned, i = 0; i < rem; ++i) cnt[order[i % 3]]++;
        // keep every split populated when the class has enough frames
        if (n >= 3) {
            for (int s = 0; s < 3; ++s) {
                while (cnt[s] == 0) {
                    int big = 0;
                    for (int t = 1; t < 3; ++t)
                        if (cnt[t] > cnt[big]) big = t;
                    cnt[big]--;
                    cnt[s]++;
                }
            }
        }
        size_t idx = 0;
        for (int s = 0; s < 3; ++s)
            for (size_t i = 0; i < cnt[s]; ++i) ds.split[pos[idx++]] = static_cast<Split>(s);
    }
    ds.manifest["split_seed"] = std::to_string(seed);
    ds.manifest["split_ratios"] = format_double(ratios.train) + "/" + format_double(ratios.val) +
                                  "/" + format_double(ratios.test);
    return ds;
}

namespace {

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}
void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<uint32_t>(v)); }

struct Reader {
    const std::string& buf;
    size_t pos = 0;
    explicit Reader(const std::string& b) : buf(b) {}
    void need(size_t n) const {
        if (pos + n > buf.size()) throw TruncatedError("dataset file truncated");
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint8_t>(buf[pos]) | (static_cast<uint16_t>(static_cast<uint8_t>(buf[pos + 1])) << 8);
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(buf[pos++]);
    }
};

} // namespace

std::string serialize_dataset(const RfDataset& ds) {
    std::string out;
    out.reserve(64 + ds.frames.size() * (11 + 8 * ds.frame_len));
    out += "RFFD";
    put_u16(out, 1); // format version
    put_u32(out, static_cast<uint32_t>(ds.frames.size()));
    put_u32(out, ds.frame_len);
    put_u16(out, 2); // channels
    put_u16(out, static_cast<uint16_t>(ds.num_classes));

    std::string payload;
    payload.reserve(ds.frames.size() * (11 + 8 * ds.frame_len));
    for (size_t i = 0; i < ds.frames.size(); ++i) {
        const IqFrame& f = ds.frames[i];
        if (f.len() != ds.frame_len) throw DataError("frame length mismatch in dataset");
        put_u32(payload, f.frame_id);
        put_u16(payload, f.device_label);
        payload.push_back(static_cast<char>(ds.split_of(i)));
        put_f32(payload, f.snr_db);
        for (uint32_t t = 0; t < ds.frame_len; ++t) {
            put_f32(payload, f.i_samples[t]);
            put_f32(payload, f.q_samples[t]);
        }
    }
    out += payload;
    put_u32(out, crc32_bytes(payload.data(), payload.size()));

    KvMap manifest = ds.manifest;
    manifest["num_devices"] = std::to_string(ds.num_devices);
    manifest["master_seed"] = std::to_string(ds.master_seed);
    std::string mtext = kv_serialize(manifest);
    put_u32(out, static_cast<uint32_t>(mtext.size()));
    out += mtext;
    return out;
}

std::string dataset_digest(const RfDataset& ds) {
    std::string bytes = serialize_dataset(ds);
    return sha256_hex(bytes.data(), bytes.size());
}

void write_dataset(const RfDataset& ds, const std::string& path) {
    std::string bytes = serialize_dataset(ds);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open dataset file for writing: " + path);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("dataset write failed: " + path);
}

RfDataset read_dataset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open dataset file: " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r(buf);
    r.need(4);
    if (buf.compare(0, 4, "RFFD") != 0) throw BadMagicError("bad dataset magic");
    r.pos = 4;
    uint16_t version = r.u16();
    if (version != 1) throw VersionError("unsupported dataset format version " + std::to_string(version));
    uint32_t num_frames = r.u32();
    uint32_t frame_len = r.u32();
    uint16_t channels = r.u16();
    uint16_t num_classes = r.u16();
    if (channels != 2) throw VersionError("unsupported channel count");

    size_t rec_size = 4 + 2 + 1 + 4 + 8ull * frame_len;
    size_t payload_size = rec_size * num_frames;
    size_t payload_start = r.pos;
    r.need(payload_size + 4);
    uint32_t crc_actual = crc32_bytes(buf.data() + payload_start, payload_size);

    RfDataset ds;
    ds.frame_len = frame_len;
    ds.num_classes = num_classes;
    ds.frames.reserve(num_frames);
    ds.split.reserve(num_frames);
    std::set<uint32_t> seen_ids;
    for (uint32_t i = 0; i < num_frames; ++i) {
        IqFrame fr;
        fr.frame_id = r.u32();
        fr.device_label = r.u16();
        uint8_t sp = r.u8();
        fr.snr_db = r.f32();
        if (sp > 2) throw DataError("invalid split tag in dataset record");
        if (fr.device_label >= num_classes) throw DataError("frame label out of range");
        if (!seen_ids.insert(fr.frame_id).second) throw DataError("duplicate frame id");
        fr.i_samples.resize(frame_len);
        fr.q_samples.resize(frame_len);
        for (uint32_t t = 0; t < frame_len; ++t) {
            fr.i_samples[t] = r.f32();
            fr.q_samples[t] = r.f32();
        }
        for (uint32_t t = 0; t < frame_len; ++t)
            if (!std::isfinite(fr.i_samples[t]) || !std::isfinite(fr.q_samples[t]))
                throw DataError("non-finite sample in dataset");
        ds.frames.push_back(std::move(fr));
        ds.split.push_back(static_cast<Split>(sp));
    }
    uint32_t crc_stored = r.u32();
    if (crc_stored != crc_actual) throw ChecksumError("dataset payload checksum mismatch");

    uint32_t mlen = r.u32();
    r.need(mlen);
    ds.manifest = kv_parse(std::string_view(buf).substr(r.pos, mlen));
    r.pos += mlen;

    auto it = ds.manifest.find("num_devices");
    ds.num_devices = it != ds.manifest.end() ? std::stoi(it->second) : num_classes;
    it = ds.manifest.find("master_seed");
    ds.master_seed = it != ds.manifest.end() ? std::stoull(it->second) : 0;
    return ds;
}

RfDataset filter_by_labels(const RfDataset& ds, const std::vector<uint16_t>& labels) {
    std::set<uint16_t> keep(labels.begin(), labels.end());
    RfDataset out;
    out.num_devices = ds.num_devices;
    out.num_classes = ds.num_classes;
    out.frame_len = ds.frame_len;
    out.master_seed = ds.master_seed;
    out.manifest = ds.manifest;
    for (size_t i = 0; i < ds.frames.size(); ++i) {
        if (!keep.count(ds.frames[i].device_label)) continue;
        out.frames.push_back(ds.frames[i]);
        out.split.push_back(ds.split_of(i));
    }
    return out;
}

RfDataset remap_labels(const RfDataset& ds, const KvMap& label_map, int new_num_classes) {
    RfDataset out = ds;
    out.num_classes = new_num_classes;
    for (auto& f : out.frames) {
        auto it = label_map.find(std::to_string(f.device_label));
        if (it != label_map.end()) f.device_label = static_cast<uint16_t>(std::stoi(it->second));
        if (f.device_label >= new_num_classes) throw ConfigError("remapped label out of range");
    }
    return out;
}

RfDataset merge_datasets(const RfDataset& a, const RfDataset& b) {
    if (a.frame_len != b.frame_len) throw DataError("merge: frame_len mismatch");
    RfDataset out;
    out.num_devices = std::max(a.num_devices, b.num_devices);
    out.num_classes = std::max(a.num_classes, b.num_classes);
    out.frame_len = a.frame_len;
    out.master_seed = a.master_seed;
    out.manifest = a.manifest;
    out.manifest["merged_extra_frames"] = std::to_string(b.frames.size());
    out.frames.reserve(a.frames.size() + b.frames.size());
    for (size_t i = 0; i < a.frames.size(); ++i) {
        out.frames.push_back(a.frames[i]);
        out.split.push_back(a.split_of(i));
    }
    for (size_t i = 0; i < b.frames.size(); ++i) {
        out.frames.push_back(b.frames[i]);
        out.split.push_back(b.split_of(i));
    }
    for (size_t i = 0; i < out.frames.size(); ++i)
        out.frames[i].frame_id = static_cast<uint32_t>(i);
    return out;
}

RfDataset sample_train_fraction(const RfDataset& ds, double fraction, uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("sample fraction must be in (0,1]");
    auto pos = ds.positions_of(Split::Train);
    if (pos.empty()) throw DataError("no train frames to sample");
    Rng rng(derive_seed(seed, {kSaltSample}));
    for (size_t i = pos.size() - 1; i > 0; --i) {
        size_t j = rng.below(i + 1);
        std::swap(pos[i], pos[j]);
    }
    size_t take = std::max<size_t>(1, static_cast<size_t>(std::floor(fraction * pos.size())));
    pos.resize(take);
    std::sort(pos.begin(), pos.end());
    RfDataset out;
    out.num_devices = ds.num_devices;
    out.num_classes = ds.num_classes;
    out.frame_len = ds.frame_len;
    out.master_seed = ds.master_seed;
    out.manifest = ds.manifest;
    out.manifest["sampled_fraction"] = format_double(fraction);
    for (size_t p : pos) {
        out.frames.push_back(ds.frames[p]);
        out.split.push_back(Split::Train);
    }
    return out;
}

} // namespace rffw
