#pragma once

#include "rffw/kv.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rffw {

/// One two-channel I/Q baseband frame. The universal sample unit.
struct IqFrame {
    std::vector<float> i_samples;
    std::vector<float> q_samples;
    uint16_t device_label = 0;
    float snr_db = 0.0f;
    uint32_t frame_id = 0;

    size_t len() const { return i_samples.size(); }
};

enum class Split : uint8_t { Train = 0, Val = 1, Test = 2 };

/// Per-device hardware impairments; these constitute the RF fingerprint.
struct DeviceProfile {
    int device_index = 0;
    double iq_gain_imbalance_db = 0.0;
    double iq_phase_imbalance_rad = 0.0;
    double cfo_norm = 0.0; // carrier frequency offset, cycles/sample
    double dc_offset_i = 0.0;
    double dc_offset_q = 0.0;
    double phase_noise_std_rad = 0.0;
    double pa_cubic_coeff = 0.0; // third-order PA nonlinearity
    uint64_t seed = 0;
};

/// Generation ranges. min == max pins a field; min > max is a config error.
struct ImpairmentRanges {
    double gain_imb_db_min = -1.0, gain_imb_db_max = 1.0;
    double phase_imb_rad_min = -0.0872664626, phase_imb_rad_max = 0.0872664626; // +-5 deg
    double cfo_min = -0.02, cfo_max = 0.02;
    double dc_min = -0.05, dc_max = 0.05;
    double phase_noise_std_min = 0.0, phase_noise_std_max = 0.02;
    double cubic_min = -0.1, cubic_max = 0.1;

    void validate() const;
    KvMap to_kv() const;
};

struct RfDataset {
    std::vector<IqFrame> frames;
    std::vector<Split> split; // parallel to frames; empty means all-train
    int num_devices = 0;
    int num_classes = 0; // num_devices, +1 when a watermark class is present
    uint32_t frame_len = 0;
    uint64_t master_seed = 0;
    KvMap manifest;

    Split split_of(size_t pos) const { return split.empty() ? Split::Train : split[pos]; }
    std::vector<size_t> positions_of(Split s) const;
    std::vector<size_t> positions_of(Split s, uint16_t label) const;
};

std::vector<DeviceProfile> make_device_profiles(int num_devices, uint64_t master_seed,
                                                const ImpairmentRanges& ranges);

struct GenOptions {
    bool noise_enabled = true;
};

/// Fixed pulse-shaping kernel: root-raised-cosine, beta 0.35, span 8 symbols,
/// 4 samples/symbol, unit peak. Exposed so tests can rebuild the clean path.
std::vector<double> pulse_kernel();
constexpr int kSamplesPerSymbol = 4;

/// QPSK symbol streams on I and Q, values +-1/sqrt(2), seeded.
void make_qpsk_symbols(uint64_t seed, int count, std::vector<double>& si, std::vector<double>& sq);

/// Upsample + convolve with pulse_kernel(), cropped to frame_len from the
/// fully-covered region.
void pulse_shape(const std::vector<double>& si, const std::vector<double>& sq, int frame_len,
                 std::vector<double>& out_i, std::vector<double>& out_q);

int symbols_needed(int frame_len);

/// Scale so mean(i^2 + q^2) == 1 across both channels jointly.
void normalize_power(IqFrame& f);

IqFrame gen_frame(const DeviceProfile& profile, uint64_t payload_seed, double snr_db,
                  int frame_len, const GenOptions& opts = {});

/// Same pipeline with caller-provided symbols (test hook for the clean path).
IqFrame gen_frame_from_symbols(const DeviceProfile& profile, const std::vector<double>& si,
                               const std::vector<double>& sq, uint64_t noise_seed, double snr_db,
                               int frame_len, const GenOptions& opts = {});

struct GenParams {
    int num_devices = 10;
    int frames_per_device = 400;
    int frame_len = 256;
    double snr_lo_db = 15.0;
    double snr_hi_db = 25.0;
    uint64_t master_seed = 42;
    ImpairmentRanges ranges;
};

RfDataset gen_dataset(const GenParams& p);

struct SplitRatios {
    double train = 0.7, val = 0.1, test = 0.2;
};

RfDataset split_dataset(RfDataset ds, const SplitRatios& ratios, uint64_t seed);

void write_dataset(const RfDataset& ds, const std::string& path);
RfDataset read_dataset(const std::string& path);

/// Canonical serialized bytes (identical to the file write_dataset produces).
std::string serialize_dataset(const RfDataset& ds);
/// SHA-256 hex of serialize_dataset(ds); the dataset's custody subject hash.
std::string dataset_digest(const RfDataset& ds);

// Dataset utilities for fine-tuning protocols.
RfDataset filter_by_labels(const RfDataset& ds, const std::vector<uint16_t>& labels);
RfDataset remap_labels(const RfDataset& ds, const KvMap& label_map, int new_num_classes);
RfDataset merge_datasets(const RfDataset& a, const RfDataset& b);
RfDataset sample_train_fraction(const RfDataset& ds, double fraction, uint64_t seed);

} // namespace rffw
