#pragma once

#include "rffw/nn/layers.hpp"

#include <optional>

namespace rffw::nn {

struct ConvDesc {
    int out_channels = 16;
    int kernel = 7;
    int stride = 2;
};

struct StageDesc {
    int channels = 16;
    int kernel = 3;
    int stride = 1;
    int count = 1;
};

struct ModelSpec {
    int input_len = 256;
    int input_channels = 2;
    ConvDesc stem;
    std::vector<StageDesc> stages;
    int num_classes = 10;

    void validate() const;
    int feature_dim() const { return stages.back().channels; }
    std::string canonical() const;
    static ModelSpec from_canonical(const std::string& text);
    /// Presets: "small" (stem + 4 residual blocks) and "resnet34-1d"
    /// (3-4-6-3 block pattern).
    static ModelSpec preset(const std::string& name, int input_len, int num_classes);
};

/// Residual block: conv-bn-relu-conv-bn + shortcut, relu. The shortcut is a
/// strided 1x1 conv + bn whenever shape changes.
template <typename T>
struct ResBlock {
    Conv1d<T> conv1, conv2;
    BatchNorm1d<T> bn1, bn2;
    Relu<T> relu1, relu2;
    bool has_down = false;
    Conv1d<T> down_conv;
    BatchNorm1d<T> down_bn;
    Ten<T> x_cache_shape; // only shape needed for identity shortcut backward

    void build(int in_ch, int out_ch, int kernel, int stride) {
        conv1.build(in_ch, out_ch, kernel, stride);
        bn1.build(out_ch);
        conv2.build(out_ch, out_ch, kernel, 1);
        bn2.build(out_ch);
        has_down = (stride != 1) || (in_ch != out_ch);
        if (has_down) {
            down_conv.build(in_ch, out_ch, 1, stride);
            down_bn.build(out_ch);
        }
    }

    Ten<T> forward(const Ten<T>& x, bool train, bool update_running, const std::string& where) {
        Ten<T> main = relu1.forward(bn1.forward(conv1.forward(x, where + ".conv1"), train, update_running));
        main = bn2.forward(conv2.forward(main, where + ".conv2"), train, update_running);
        Ten<T> sc;
        if (has_down)
            sc = down_bn.forward(down_conv.forward(x, where + ".down"), train, update_running);
        else
            sc = x;
        for (int64_t i = 0; i < main.numel(); ++i) main.data[i] += sc.data[i];
        return relu2.forward(main);
    }

    Ten<T> backward(const Ten<T>& dy, const std::string& prefix, GradMap<T>& g) {
        Ten<T> d = relu2.backward(dy);
        // residual add fans the gradient out to both branches
        Ten<T> d_main = d;
        Ten<T> d_sc = d;
        d_main = bn2.backward(d_main, g[prefix + ".bn2.gamma"], g[prefix + ".bn2.beta"]);
        d_main = conv2.backward(d_main, g[prefix + ".conv2.w"]);
        d_main = relu1.backward(d_main);
        d_main = bn1.backward(d_main, g[prefix + ".bn1.gamma"], g[prefix + ".bn1.beta"]);
        Ten<T> dx = conv1.backward(d_main, g[prefix + ".conv1.w"]);
        if (has_down) {
            d_sc = down_bn.backward(d_sc, g[prefix + ".down.bn.gamma"], g[prefix + ".down.bn.beta"]);
            d_sc = down_conv.backward(d_sc, g[prefix + ".down.conv.w"]);
        }
        for (int64_t i = 0; i < dx.numel(); ++i) dx.data[i] += d_sc.data[i];
        return dx;
    }
};

/// The residual 1-D classifier. Forward caches activations for one backward.
template <typename T>
class Network {
public:
    explicit Network(const ModelSpec& spec) : spec_(spec) {
        spec.validate();
        stem_conv_.build(spec.input_channels, spec.stem.out_channels, spec.stem.kernel,
                         spec.stem.stride);
        stem_bn_.build(spec.stem.out_channels);
        int ch = spec.stem.out_channels;
        for (const auto& st : spec.stages) {
            std::vector<ResBlock<T>> blocks(st.count);
            for (int b = 0; b < st.count; ++b) {
                blocks[b].build(ch, st.channels, st.kernel, b == 0 ? st.stride : 1);
                ch = st.channels;
            }
            stages_.push_back(std::move(blocks));
        }
        head_.build(ch, spec.num_classes);
    }

    const ModelSpec& spec() const { return spec_; }

    /// stem + the first `stages` stages run in eval mode and take no updates
    void set_freeze_prefix(int stages) { frozen_prefix_ = stages; }
    int freeze_prefix() const { return frozen_prefix_; }

    // Kaiming fan-in init; each tensor draws from a stream derived from its name
    void init(uint64_t seed) {
        Rng r_stem(derive_seed(seed, fnv1a("stem.conv.w")));
        stem_conv_.init(r_stem);
        stem_bn_.reset();
        for (size_t s = 0; s < stages_.size(); ++s)
            for (size_t b = 0; b < stages_[s].size(); ++b) {
                auto& blk = stages_[s][b];
                std::string pre = block_prefix(s, b);
                Rng r1(derive_seed(seed, fnv1a((pre + ".conv1.w").c_str())));
                blk.conv1.init(r1);
                Rng r2(derive_seed(seed, fnv1a((pre + ".conv2.w").c_str())));
                blk.conv2.init(r2);
                blk.bn1.reset();
                blk.bn2.reset();
                if (blk.has_down) {
                    Rng rd(derive_seed(seed, fnv1a((pre + ".down.conv.w").c_str())));
                    blk.down_conv.init(rd);
                    blk.down_bn.reset();
                }
            }
        Rng rh(derive_seed(seed, fnv1a("head.w")));
        head_.init(rh);
    }

    std::vector<ParamRef<T>> params() {
        std::vector<ParamRef<T>> out;
        auto add_bn = [&out](BatchNorm1d<T>& bn, const std::string& pre, int stage) {
            out.push_back({pre + ".gamma", &bn.gamma, true, stage});
            out.push_back({pre + ".beta", &bn.beta, true, stage});
            out.push_back({pre + ".rmean", &bn.running_mean, false, stage});
            out.push_back({pre + ".rvar", &bn.running_var, false, stage});
        };
        out.push_back({"stem.conv.w", &stem_conv_.w, true, -1});
        add_bn(stem_bn_, "stem.bn", -1);
        for (size_t s = 0; s < stages_.size(); ++s)
            for (size_t b = 0; b < stages_[s].size(); ++b) {
                auto& blk = stages_[s][b];
                std::string pre = block_prefix(s, b);
                out.push_back({pre + ".conv1.w", &blk.conv1.w, true, static_cast<int>(s)});
                add_bn(blk.bn1, pre + ".bn1", static_cast<int>(s));
                out.push_back({pre + ".conv2.w", &blk.conv2.w, true, static_cast<int>(s)});
                add_bn(blk.bn2, pre + ".bn2", static_cast<int>(s));
                if (blk.has_down) {
                    out.push_back({pre + ".down.conv.w", &blk.down_conv.w, true, static_cast<int>(s)});
                    add_bn(blk.down_bn, pre + ".down.bn", static_cast<int>(s));
                }
            }
        out.push_back({"head.w", &head_.w, true, static_cast<int>(stages_.size())});
        out.push_back({"head.b", &head_.b, true, static_cast<int>(stages_.size())});
        return out;
    }

    bool is_frozen(int stage_index) const { return stage_index < frozen_prefix_; }

    void load_weights(const std::map<std::string, Ten<float>>& w) {
        for (auto& p : params()) {
            auto it = w.find(p.name);
            if (it == w.end()) throw DataError("checkpoint missing weight: " + p.name);
            if (it->second.shape != p.value->shape)
                throw DataError("weight shape mismatch for " + p.name + ": " +
                                shape_str(it->second.shape) + " vs " + shape_str(p.value->shape));
            *p.value = it->second.template cast<T>();
        }
    }

    std::map<std::string, Ten<float>> export_weights() {
        std::map<std::string, Ten<float>> out;
        for (auto& p : params()) out[p.name] = p.value->template cast<float>();
        return out;
    }

    Ten<T> forward(const Ten<T>& x, bool train, bool update_running, Ten<T>* features = nullptr) {
        if (x.shape.size() != 3 || x.shape[1] != spec_.input_channels ||
            x.shape[2] != spec_.input_len)
            throw DataError("shape mismatch at input: got " + shape_str(x.shape) + ", expected [N," +
                            std::to_string(spec_.input_channels) + "," +
                            std::to_string(spec_.input_len) + "]");
        // stem is frozen whenever any prefix is frozen
        const bool stem_mode = train && frozen_prefix_ == 0;
        Ten<T> h = stem_relu_.forward(
            stem_bn_.forward(stem_conv_.forward(x, "stem.conv"), stem_mode, stem_mode && update_running));
        for (size_t s = 0; s < stages_.size(); ++s) {
            bool st_train = train && !is_frozen(static_cast<int>(s));
            for (size_t b = 0; b < stages_[s].size(); ++b)
                h = stages_[s][b].forward(h, st_train, st_train && update_running,
                                          block_prefix(s, b));
        }
        Ten<T> pooled = gap_.forward(h);
        pooled_cache_shape_ = {pooled.shape[0], pooled.shape[1]};
        if (features) *features = pooled;
        if (nan_checks_ && !pooled.all_finite()) throw InternalError("non-finite activations");
        return head_.forward(pooled, "head");
    }

    /// Backward from dlogits; fills grads for all non-frozen trainable params.
    void backward(const Ten<T>& dlogits, GradMap<T>& grads) {
        GradMap<T> all;
        Ten<T> d = head_.backward(dlogits, all["head.w"], all["head.b"]);
        d = gap_.backward(d, pooled_cache_shape_[0], pooled_cache_shape_[1]);
        for (int s = static_cast<int>(stages_.size()) - 1; s >= 0; --s) {
            if (is_frozen(s)) {
                d = Ten<T>(); // gradient is not needed below the frozen boundary
                break;
            }
            for (int b = static_cast<int>(stages_[s].size()) - 1; b >= 0; --b)
                d = stages_[s][b].backward(d, block_prefix(s, b), all);
        }
        if (frozen_prefix_ == 0 && d.numel() > 0) {
            d = stem_relu_.backward(d);
            d = stem_bn_.backward(d, all["stem.bn.gamma"], all["stem.bn.beta"]);
            d = stem_conv_.backward(d, all["stem.conv.w"]);
        }
        for (auto& [name, g] : all)
            if (g.numel() > 0) grads[name] = std::move(g);
    }

    double min_relu_margin() const {
        double m = stem_relu_.min_abs_input;
        for (const auto& st : stages_)
            for (const auto& b : st) m = std::min({m, b.relu1.min_abs_input, b.relu2.min_abs_input});
        return m;
    }

    void set_nan_checks(bool on) { nan_checks_ = on; }

    static std::string block_prefix(size_t stage, size_t block) {
        return "s" + std::to_string(stage) + ".b" + std::to_string(block);
    }

private:
    ModelSpec spec_;
    Conv1d<T> stem_conv_;
    BatchNorm1d<T> stem_bn_;
    Relu<T> stem_relu_;
    std::vector<std::vector<ResBlock<T>>> stages_;
    GlobalAvgPool<T> gap_;
    Dense<T> head_;
    int frozen_prefix_ = 0;
    bool nan_checks_ = false;
    std::vector<int> pooled_cache_shape_{0, 0};
};

} // namespace rffw::nn
