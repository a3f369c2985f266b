#pragma once

#include "rffw/nn/tensor.hpp"
#include "rffw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace rffw::nn {

inline int conv_out_len(int in_len, int kernel, int stride) {
    int pad = kernel / 2;
    return (in_len + 2 * pad - kernel) / stride + 1;
}

template <typename T>
using GradMap = std::map<std::string, Ten<T>>;

template <typename T>
struct ParamRef {
    std::string name;
    Ten<T>* value;
    bool trainable;   // running BN stats are saved but not optimized
    int stage_index;  // -1 stem, 0..S-1 stages, S head
};

/// 1-D convolution, zero padding kernel/2, no bias (batch norm follows).
template <typename T>
struct Conv1d {
    int in_ch = 0, out_ch = 0, kernel = 1, stride = 1;
    Ten<T> w; // [out_ch, in_ch, kernel]
    Ten<T> x_cache;

    void build(int ic, int oc, int k, int s) {
        in_ch = ic;
        out_ch = oc;
        kernel = k;
        stride = s;
        w = Ten<T>({oc, ic, k});
    }

    void init(Rng& rng) {
        double std = std::sqrt(2.0 / (in_ch * kernel));
        for (auto& v : w.data) v = static_cast<T>(std * rng.normal());
    }

    Ten<T> forward(const Ten<T>& x, const std::string& where) {
        if (x.shape.size() != 3 || x.shape[1] != in_ch)
            throw DataError("shape mismatch at " + where + ": got " + shape_str(x.shape) +
                            ", expected [N," + std::to_string(in_ch) + ",L]");
        const int n = x.shape[0], li = x.shape[2];
        const int lo = conv_out_len(li, kernel, stride);
        if (lo < 1) throw DataError("shape mismatch at " + where + ": output length < 1");
        const int pad = kernel / 2;
        Ten<T> y({n, out_ch, lo});
        const T* xp = x.ptr();
        T* yp = y.ptr();
        const T* wp = w.ptr();
#pragma omp parallel for collapse(2) schedule(static)
        for (int b = 0; b < n; ++b) {
            for (int oc = 0; oc < out_ch; ++oc) {
                T* yrow = yp + (static_cast<int64_t>(b) * out_ch + oc) * lo;
                for (int ic = 0; ic < in_ch; ++ic) {
                    const T* xrow = xp + (static_cast<int64_t>(b) * in_ch + ic) * li;
                    const T* wrow = wp + (static_cast<int64_t>(oc) * in_ch + ic) * kernel;
                    for (int k = 0; k < kernel; ++k) {
                        const T wv = wrow[k];
                        const int off = k - pad;
                        int t0 = 0, t1 = lo;
                        // clamp to taps that fall inside the input
                        while (t0 < lo && t0 * stride + off < 0) ++t0;
                        while (t1 > t0 && (t1 - 1) * stride + off >= li) --t1;
                        for (int t = t0; t < t1; ++t) yrow[t] += wv * xrow[t * stride + off];
                    }
                }
            }
        }
        x_cache = x;
        return y;
    }

    Ten<T> backward(const Ten<T>& dy, Ten<T>& dw) {
        const Ten<T>& x = x_cache;
        const int n = x.shape[0], li = x.shape[2], lo = dy.shape[2];
        const int pad = kernel / 2;
        dw = Ten<T>({out_ch, in_ch, kernel});
        Ten<T> dx({n, in_ch, li});
        const T* xp = x.ptr();
        const T* dyp = dy.ptr();
        const T* wp = w.ptr();
        T* dwp = dw.ptr();
        T* dxp = dx.ptr();
#pragma omp parallel for collapse(2) schedule(static)
        for (int oc = 0; oc < out_ch; ++oc) {
            for (int ic = 0; ic < in_ch; ++ic) {
                T* dwrow = dwp + (static_cast<int64_t>(oc) * in_ch + ic) * kernel;
                for (int k = 0; k < kernel; ++k) {
                    const int off = k - pad;
                    T acc = 0;
                    for (int b = 0; b < n; ++b) {
                        const T* dyrow = dyp + (static_cast<int64_t>(b) * out_ch + oc) * lo;
                        const T* xrow = xp + (static_cast<int64_t>(b) * in_ch + ic) * li;
                        int t0 = 0, t1 = lo;
                        while (t0 < lo && t0 * stride + off < 0) ++t0;
                        while (t1 > t0 && (t1 - 1) * stride + off >= li) --t1;
                        for (int t = t0; t < t1; ++t) acc += dyrow[t] * xrow[t * stride + off];
                    }
                    dwrow[k] = acc;
                }
            }
        }
#pragma omp parallel for collapse(2) schedule(static)
        for (int b = 0; b < n; ++b) {
            for (int ic = 0; ic < in_ch; ++ic) {
                T* dxrow = dxp + (static_cast<int64_t>(b) * in_ch + ic) * li;
                for (int oc = 0; oc < out_ch; ++oc) {
                    const T* dyrow = dyp + (static_cast<int64_t>(b) * out_ch + oc) * lo;
                    const T* wrow = wp + (static_cast<int64_t>(oc) * in_ch + ic) * kernel;
                    for (int k = 0; k < kernel; ++k) {
                        const T wv = wrow[k];
                        const int off = k - pad;
                        int t0 = 0, t1 = lo;
                        while (t0 < lo && t0 * stride + off < 0) ++t0;
                        while (t1 > t0 && (t1 - 1) * stride + off >= li) --t1;
                        for (int t = t0; t < t1; ++t) dxrow[t * stride + off] += wv * dyrow[t];
                    }
                }
            }
        }
        return dx;
    }
};

/// Batch norm over (N, L) per channel. Running stats use the biased batch
/// variance; eval mode normalizes with the stored running statistics.
template <typename T>
struct BatchNorm1d {
    int ch = 0;
    double momentum = 0.1;
    double eps = 1e-5;
    Ten<T> gamma, beta, running_mean, running_var;
    Ten<T> xhat_cache, inv_std_cache;
    bool train_cached = false;

    void build(int c) {
        ch = c;
        gamma = Ten<T>({c});
        beta = Ten<T>({c});
        running_mean = Ten<T>({c});
        running_var = Ten<T>({c});
        reset();
    }

    void reset() {
        std::fill(gamma.data.begin(), gamma.data.end(), T(1));
        std::fill(beta.data.begin(), beta.data.end(), T(0));
        std::fill(running_mean.data.begin(), running_mean.data.end(), T(0));
        std::fill(running_var.data.begin(), running_var.data.end(), T(1));
    }

    Ten<T> forward(const Ten<T>& x, bool train, bool update_running) {
        const int n = x.shape[0], l = x.shape[2];
        const int64_t m = static_cast<int64_t>(n) * l;
        Ten<T> y(x.shape);
        xhat_cache = Ten<T>(x.shape);
        inv_std_cache = Ten<T>({ch});
        train_cached = train;
        const T* xp = x.ptr();
        T* yp = y.ptr();
        T* xh = xhat_cache.ptr();
#pragma omp parallel for schedule(static)
        for (int c = 0; c < ch; ++c) {
            double mean, var;
            if (train) {
                double s = 0.0;
                for (int b = 0; b < n; ++b) {
                    const T* row = xp + (static_cast<int64_t>(b) * ch + c) * l;
                    for (int t = 0; t < l; ++t) s += row[t];
                }
                mean = s / static_cast<double>(m);
                double v = 0.0;
                for (int b = 0; b < n; ++b) {
                    const T* row = xp + (static_cast<int64_t>(b) * ch + c) * l;
                    for (int t = 0; t < l; ++t) {
                        double d = row[t] - mean;
                        v += d * d;
                    }
                }
                var = v / static_cast<double>(m);
                if (update_running) {
                    running_mean.data[c] =
                        static_cast<T>((1.0 - momentum) * running_mean.data[c] + momentum * mean);
                    running_var.data[c] =
                        static_cast<T>((1.0 - momentum) * running_var.data[c] + momentum * var);
                }
            } else {
                mean = running_mean.data[c];
                var = running_var.data[c];
            }
            const double inv_std = 1.0 / std::sqrt(var + eps);
            inv_std_cache.data[c] = static_cast<T>(inv_std);
            const T g = gamma.data[c], bta = beta.data[c];
            for (int b = 0; b < n; ++b) {
                const int64_t base = (static_cast<int64_t>(b) * ch + c) * l;
                for (int t = 0; t < l; ++t) {
                    T h = static_cast<T>((xp[base + t] - mean) * inv_std);
                    xh[base + t] = h;
                    yp[base + t] = g * h + bta;
                }
            }
        }
        return y;
    }

    Ten<T> backward(const Ten<T>& dy, Ten<T>& dgamma, Ten<T>& dbeta) {
        const int n = dy.shape[0], l = dy.shape[2];
        const int64_t m = static_cast<int64_t>(n) * l;
        dgamma = Ten<T>({ch});
        dbeta = Ten<T>({ch});
        Ten<T> dx(dy.shape);
        const T* dyp = dy.ptr();
        const T* xh = xhat_cache.ptr();
        T* dxp = dx.ptr();
#pragma omp parallel for schedule(static)
        for (int c = 0; c < ch; ++c) {
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (int b = 0; b < n; ++b) {
                const int64_t base = (static_cast<int64_t>(b) * ch + c) * l;
                for (int t = 0; t < l; ++t) {
                    sum_dy += dyp[base + t];
                    sum_dy_xhat += static_cast<double>(dyp[base + t]) * xh[base + t];
                }
            }
            dgamma.data[c] = static_cast<T>(sum_dy_xhat);
            dbeta.data[c] = static_cast<T>(sum_dy);
            const double g = gamma.data[c];
            const double inv_std = inv_std_cache.data[c];
            if (train_cached) {
                const double mean_dy = sum_dy / static_cast<double>(m);
                const double mean_dy_xhat = sum_dy_xhat / static_cast<double>(m);
                for (int b = 0; b < n; ++b) {
                    const int64_t base = (static_cast<int64_t>(b) * ch + c) * l;
                    for (int t = 0; t < l; ++t)
                        dxp[base + t] = static_cast<T>(
                            g * inv_std * (dyp[base + t] - mean_dy - xh[base + t] * mean_dy_xhat));
                }
            } else {
                for (int b = 0; b < n; ++b) {
                    const int64_t base = (static_cast<int64_t>(b) * ch + c) * l;
                    for (int t = 0; t < l; ++t)
                        dxp[base + t] = static_cast<T>(g * inv_std * dyp[base + t]);
                }
            }
        }
        return dx;
    }
};

template <typename T>
struct Relu {
    Ten<T> y_cache;
    double min_abs_input = 0.0; // kink margin of the last forward

    Ten<T> forward(const Ten<T>& x) {
        Ten<T> y(x.shape);
        double margin = std::numeric_limits<double>::infinity();
        for (int64_t i = 0; i < x.numel(); ++i) {
            margin = std::min(margin, std::abs(static_cast<double>(x.data[i])));
            y.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
        }
        min_abs_input = margin;
        y_cache = y;
        return y;
    }

    Ten<T> backward(const Ten<T>& dy) {
        Ten<T> dx(dy.shape);
        for (int64_t i = 0; i < dy.numel(); ++i)
            dx.data[i] = y_cache.data[i] > T(0) ? dy.data[i] : T(0);
        return dx;
    }
};

/// Global average pool over the time axis: [N,C,L] -> [N,C].
template <typename T>
struct GlobalAvgPool {
    int len_cache = 0;

    Ten<T> forward(const Ten<T>& x) {
        const int n = x.shape[0], c = x.shape[1], l = x.shape[2];
        len_cache = l;
        Ten<T> y({n, c});
        for (int b = 0; b < n; ++b)
            for (int ci = 0; ci < c; ++ci) {
                const T* row = x.ptr() + (static_cast<int64_t>(b) * c + ci) * l;
                double s = 0.0;
                for (int t = 0; t < l; ++t) s += row[t];
                y.data[static_cast<int64_t>(b) * c + ci] = static_cast<T>(s / l);
            }
        return y;
    }

    Ten<T> backward(const Ten<T>& dy, int n, int c) {
        Ten<T> dx({n, c, len_cache});
        for (int b = 0; b < n; ++b)
            for (int ci = 0; ci < c; ++ci) {
                T g = dy.data[static_cast<int64_t>(b) * c + ci] / static_cast<T>(len_cache);
                T* row = dx.ptr() + (static_cast<int64_t>(b) * c + ci) * len_cache;
                for (int t = 0; t < len_cache; ++t) row[t] = g;
            }
        return dx;
    }
};

template <typename T>
struct Dense {
    int in_f = 0, out_f = 0;
    Ten<T> w, b; // w: [out_f, in_f]
    Ten<T> x_cache;

    void build(int inf, int outf) {
        in_f = inf;
        out_f = outf;
        w = Ten<T>({outf, inf});
        b = Ten<T>({outf});
    }

    void init(Rng& rng) {
        double std = std::sqrt(2.0 / in_f);
        for (auto& v : w.data) v = static_cast<T>(std * rng.normal());
        std::fill(b.data.begin(), b.data.end(), T(0));
    }

    Ten<T> forward(const Ten<T>& x, const std::string& where) {
        if (x.shape.size() != 2 || x.shape[1] != in_f)
            throw DataError("shape mismatch at " + where + ": got " + shape_str(x.shape) +
                            ", expected [N," + std::to_string(in_f) + "]");
        const int n = x.shape[0];
        Ten<T> y({n, out_f});
        for (int bi = 0; bi < n; ++bi) {
            const T* xrow = x.ptr() + static_cast<int64_t>(bi) * in_f;
            T* yrow = y.ptr() + static_cast<int64_t>(bi) * out_f;
            for (int o = 0; o < out_f; ++o) {
                const T* wrow = w.ptr() + static_cast<int64_t>(o) * in_f;
                double acc = b.data[o];
                for (int i = 0; i < in_f; ++i) acc += static_cast<double>(wrow[i]) * xrow[i];
                yrow[o] = static_cast<T>(acc);
            }
        }
        x_cache = x;
        return y;
    }

    Ten<T> backward(const Ten<T>& dy, Ten<T>& dw, Ten<T>& db) {
        const int n = dy.shape[0];
        dw = Ten<T>({out_f, in_f});
        db = Ten<T>({out_f});
        Ten<T> dx({n, in_f});
        for (int o = 0; o < out_f; ++o) {
            T* dwrow = dw.ptr() + static_cast<int64_t>(o) * in_f;
            double dbacc = 0.0;
            for (int bi = 0; bi < n; ++bi) {
                const T g = dy.data[static_cast<int64_t>(bi) * out_f + o];
                dbacc += g;
                const T* xrow = x_cache.ptr() + static_cast<int64_t>(bi) * in_f;
                for (int i = 0; i < in_f; ++i) dwrow[i] += g * xrow[i];
            }
            db.data[o] = static_cast<T>(dbacc);
        }
        for (int bi = 0; bi < n; ++bi) {
            const T* dyrow = dy.ptr() + static_cast<int64_t>(bi) * out_f;
            T* dxrow = dx.ptr() + static_cast<int64_t>(bi) * in_f;
            for (int o = 0; o < out_f; ++o) {
                const T g = dyrow[o];
                const T* wrow = w.ptr() + static_cast<int64_t>(o) * in_f;
                for (int i = 0; i < in_f; ++i) dxrow[i] += g * wrow[i];
            }
        }
        return dx;
    }
};

/// Mean softmax cross-entropy. Returns loss; writes dloss/dlogits and
/// optionally the softmax probabilities.
template <typename T>
double softmax_ce(const Ten<T>& logits, const std::vector<int>& labels, Ten<T>* dlogits,
                  Ten<T>* probs_out = nullptr) {
    const int n = logits.shape[0], c = logits.shape[1];
    if (static_cast<int>(labels.size()) != n) throw DataError("label count mismatch");
    Ten<T> probs({n, c});
    double loss = 0.0;
    for (int b = 0; b < n; ++b) {
        if (labels[b] < 0 || labels[b] >= c)
            throw DataError("label out of range: " + std::to_string(labels[b]));
        const T* row = logits.ptr() + static_cast<int64_t>(b) * c;
        T* prow = probs.ptr() + static_cast<int64_t>(b) * c;
        double mx = row[0];
        for (int j = 1; j < c; ++j) mx = std::max(mx, static_cast<double>(row[j]));
        double z = 0.0;
        for (int j = 0; j < c; ++j) z += std::exp(static_cast<double>(row[j]) - mx);
        double logz = std::log(z) + mx;
        for (int j = 0; j < c; ++j)
            prow[j] = static_cast<T>(std::exp(static_cast<double>(row[j]) - logz));
        loss -= static_cast<double>(row[labels[b]]) - logz;
    }
    loss /= n;
    if (dlogits) {
        *dlogits = probs;
        for (int b = 0; b < n; ++b) {
            T* drow = dlogits->ptr() + static_cast<int64_t>(b) * c;
            drow[labels[b]] -= T(1);
            for (int j = 0; j < c; ++j) drow[j] /= static_cast<T>(n);
        }
    }
    if (probs_out) *probs_out = std::move(probs);
    return loss;
}

} // namespace rffw::nn
