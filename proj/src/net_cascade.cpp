#include "kmoco/net/cascade.hpp"

#include "kmoco/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace kmoco::net {

NetworkConfig NetworkConfig::paper_scale() {
    NetworkConfig cfg;
    cfg.n_units = 10;
    cfg.resnet_filters = 64;
    cfg.resnet_layers = 3;
    cfg.leaky_slope = 0.2;
    cfg.unet_levels = 6;
    cfg.unet_base_filters = 64;
    cfg.unet_max_filters = 512;
    cfg.kernel_size = 3;
    return cfg;
}

NetworkConfig NetworkConfig::desk_scale() { return NetworkConfig{}; }

void NetworkConfig::validate() const {
    if (n_units < 0) throw std::invalid_argument("NetworkConfig: n_units must be >= 0");
    if (resnet_filters < 1 || resnet_layers < 2 || unet_levels < 1 ||
        unet_base_filters < 1 || unet_max_filters < 1)
        throw std::invalid_argument("NetworkConfig: counts must be >= 1");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
        throw std::invalid_argument("NetworkConfig: leaky_slope must lie in (0,1)");
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw std::invalid_argument("NetworkConfig: kernel_size must be odd");
}

int NetworkConfig::level_filters(int level) const {
    long long f = unet_base_filters;
    for (int l = 0; l < level; ++l) f *= 2;
    return static_cast<int>(std::min<long long>(f, unet_max_filters));
}

std::string variant_name(Variant v) {
    return v == Variant::TwoBranch ? "two_branch" : "single_branch";
}

Variant variant_from_name(const std::string& name) {
    if (name == "two_branch") return Variant::TwoBranch;
    if (name == "single_branch") return Variant::SingleBranch;
    throw std::invalid_argument("unknown model variant '" + name + "'");
}

std::size_t Weights::parameter_count() const {
    std::size_t n = 0;
    for (const Entry& e : entries) n += e.size();
    return n;
}

Weights::Entry& Weights::find(const std::string& name) {
    for (Entry& e : entries) {
        if (e.name == name) return e;
    }
    throw std::invalid_argument("Weights: no tensor named '" + name + "'");
}

const Weights::Entry& Weights::find(const std::string& name) const {
    for (const Entry& e : entries) {
        if (e.name == name) return e;
    }
    throw std::invalid_argument("Weights: no tensor named '" + name + "'");
}

Weights Weights::zeros_like() const {
    Weights z;
    z.config = config;
    z.variant = variant;
    z.entries.reserve(entries.size());
    for (const Entry& e : entries)
        z.entries.push_back({e.name, e.shape, std::vector<double>(e.size(), 0.0)});
    return z;
}

namespace {

void push_conv(Weights& w, const std::string& prefix, int out_c, int in_c, int k) {
    w.entries.push_back({prefix + ".weight", {out_c, in_c, k, k},
                         std::vector<double>(static_cast<std::size_t>(out_c) * in_c * k * k, 0.0)});
    w.entries.push_back({prefix + ".bias", {out_c}, std::vector<double>(out_c, 0.0)});
}

} // namespace

Weights init_weights_zero(const NetworkConfig& cfg, Variant variant) {
    cfg.validate();
    Weights w;
    w.config = cfg;
    w.variant = variant;
    const int k = cfg.kernel_size;
    const int F = cfg.resnet_filters;
    for (int n = 0; n < cfg.n_units; ++n) {
        const std::string u = "unit" + std::to_string(n);
        for (int j = 0; j < cfg.resnet_layers; ++j) {
            const int in_c = (j == 0) ? 2 : F;
            const int out_c = (j == cfg.resnet_layers - 1) ? 2 : F;
            push_conv(w, u + ".resnet.conv" + std::to_string(j), out_c, in_c, k);
        }
        for (int l = 0; l < cfg.unet_levels; ++l) {
            const int in_c = (l == 0) ? 4 : cfg.level_filters(l - 1);
            push_conv(w, u + ".unet.enc" + std::to_string(l), cfg.level_filters(l), in_c, k);
        }
        for (int l = 0; l < cfg.unet_levels - 1; ++l) {
            const int in_c = cfg.level_filters(l + 1) + cfg.level_filters(l);
            push_conv(w, u + ".unet.dec" + std::to_string(l), cfg.level_filters(l), in_c, k);
        }
        push_conv(w, u + ".unet.out", 2, cfg.level_filters(0), 1);
    }
    return w;
}

Weights init_weights(const NetworkConfig& cfg, Variant variant, std::uint64_t seed) {
    Weights w = init_weights_zero(cfg, variant);
    Rng rng(Rng::derive_seed(seed, 0x77656967687473ULL));
    for (Weights::Entry& e : w.entries) {
        if (e.shape.size() != 4) continue; // biases stay zero
        const int in_c = e.shape[1];
        const int k = e.shape[2];
        const double fan_in = static_cast<double>(in_c) * k * k;
        const double stddev = std::sqrt(2.0 / fan_in);
        for (double& v : e.data) v = stddev * rng.normal();
    }
    return w;
}

Tensor resnet_block_forward(const Tensor& x_rp, const Weights& w, int unit,
                            const NetworkConfig& cfg, UnitRecord* rec) {
    if (x_rp.c != 2) throw std::invalid_argument("resnet block: input must have 2 channels");
    const std::string u = "unit" + std::to_string(unit) + ".resnet.conv";
    Tensor cur = x_rp;
    if (rec) {
        rec->rp_in = x_rp;
        rec->rn_pre.clear();
        rec->rn_act.clear();
    }
    for (int j = 0; j < cfg.resnet_layers; ++j) {
        const Weights::Entry& wt = w.find(u + std::to_string(j) + ".weight");
        const Weights::Entry& bt = w.find(u + std::to_string(j) + ".bias");
        Tensor pre;
        conv2d_forward(cur, wt.data, bt.data, wt.shape[0], wt.shape[2], 1, pre);
        if (j == cfg.resnet_layers - 1) {
            cur = std::move(pre); // projection back to 2 channels, no activation
        } else {
            Tensor act;
            leaky_relu_forward(pre, cfg.leaky_slope, act);
            if (rec) {
                rec->rn_pre.push_back(std::move(pre));
                rec->rn_act.push_back(act);
            }
            cur = std::move(act);
        }
    }
    // identity skip
    for (std::size_t i = 0; i < cur.size(); ++i) cur.v[i] += x_rp.v[i];
    if (rec) rec->rp_out = cur;
    return cur;
}

Tensor unet_forward(const Tensor& x4, const Weights& w, int unit, const NetworkConfig& cfg,
                    UnitRecord* rec) {
    if (x4.c != 4) throw std::invalid_argument("unet: input must have 4 channels");
    const int L = cfg.unet_levels;
    const int div = 1 << (L - 1);
    if (x4.h % div != 0 || x4.w % div != 0)
        throw std::invalid_argument("unet: spatial dims must be divisible by 2^(levels-1)");
    const std::string u = "unit" + std::to_string(unit) + ".unet.";

    if (rec) {
        rec->unet_in = x4;
        rec->enc_pre.assign(L, Tensor());
        rec->enc_act.assign(L, Tensor());
        rec->dec_cat.assign(std::max(L - 1, 0), Tensor());
        rec->dec_pre.assign(std::max(L - 1, 0), Tensor());
        rec->dec_act.assign(std::max(L - 1, 0), Tensor());
    }

    std::vector<Tensor> enc(L);
    Tensor cur;
    for (int l = 0; l < L; ++l) {
        const Weights::Entry& wt = w.find(u + "enc" + std::to_string(l) + ".weight");
        const Weights::Entry& bt = w.find(u + "enc" + std::to_string(l) + ".bias");
        Tensor pre;
        conv2d_forward(l == 0 ? x4 : enc[l - 1], wt.data, bt.data, wt.shape[0], wt.shape[2],
                       l == 0 ? 1 : 2, pre);
        Tensor act;
        leaky_relu_forward(pre, cfg.leaky_slope, act);
        if (rec) {
            rec->enc_pre[l] = pre;
            rec->enc_act[l] = act;
        }
        enc[l] = std::move(act);
    }

    cur = enc[L - 1];
    for (int l = L - 2; l >= 0; --l) {
        Tensor up;
        upsample2_forward(cur, up);
        Tensor cat;
        concat_forward(up, enc[l], cat);
        const Weights::Entry& wt = w.find(u + "dec" + std::to_string(l) + ".weight");
        const Weights::Entry& bt = w.find(u + "dec" + std::to_string(l) + ".bias");
        Tensor pre;
        conv2d_forward(cat, wt.data, bt.data, wt.shape[0], wt.shape[2], 1, pre);
        Tensor act;
        leaky_relu_forward(pre, cfg.leaky_slope, act);
        if (rec) {
            rec->dec_cat[l] = std::move(cat);
            rec->dec_pre[l] = pre;
            rec->dec_act[l] = act;
        }
        cur = std::move(act);
    }

    const Weights::Entry& wt = w.find(u + "out.weight");
    const Weights::Entry& bt = w.find(u + "out.bias");
    Tensor out;
    conv2d_forward(cur, wt.data, bt.data, 2, 1, 1, out);
    return out;
}

namespace {

// Backward through one resnet block; returns the gradient w.r.t. the block
// input (skip path included).
Tensor resnet_block_backward(const UnitRecord& rec, const Weights& w, int unit,
                             const NetworkConfig& cfg, const Tensor& grad_out, Weights& grads) {
    const std::string u = "unit" + std::to_string(unit) + ".resnet.conv";
    Tensor grad = grad_out;
    for (int j = cfg.resnet_layers - 1; j >= 0; --j) {
        const Weights::Entry& wt = w.find(u + std::to_string(j) + ".weight");
        Weights::Entry& gw = grads.find(u + std::to_string(j) + ".weight");
        Weights::Entry& gb = grads.find(u + std::to_string(j) + ".bias");
        const Tensor& input = (j == 0) ? rec.rp_in : rec.rn_act[j - 1];
        if (j != cfg.resnet_layers - 1) leaky_relu_backward(rec.rn_pre[j], cfg.leaky_slope, grad);
        Tensor grad_in;
        conv2d_backward(input, wt.data, wt.shape[0], wt.shape[2], 1, grad, grad_in, gw.data,
                        gb.data);
        grad = std::move(grad_in);
    }
    // skip path
    for (std::size_t i = 0; i < grad.size(); ++i) grad.v[i] += grad_out.v[i];
    return grad;
}

// Backward through the U-Net; returns the gradient w.r.t. the 4-channel input.
Tensor unet_backward(const UnitRecord& rec, const Weights& w, int unit,
                     const NetworkConfig& cfg, const Tensor& grad_out, Weights& grads) {
    const int L = cfg.unet_levels;
    const std::string u = "unit" + std::to_string(unit) + ".unet.";

    const Tensor& out_in = (L >= 2) ? rec.dec_act[0] : rec.enc_act[0];
    const Weights::Entry& wo = w.find(u + "out.weight");
    Weights::Entry& gwo = grads.find(u + "out.weight");
    Weights::Entry& gbo = grads.find(u + "out.bias");
    Tensor grad;
    conv2d_backward(out_in, wo.data, 2, 1, 1, grad_out, grad, gwo.data, gbo.data);

    // gradient flowing into each encoder activation via skip connections
    std::vector<Tensor> enc_grad(L);
    for (int l = 0; l < L; ++l) {
        const Tensor& act = rec.enc_act[l];
        enc_grad[l] = Tensor(act.c, act.h, act.w);
    }

    for (int l = 0; l < L - 1; ++l) {
        // grad currently holds dL/d(dec_act[l])
        leaky_relu_backward(rec.dec_pre[l], cfg.leaky_slope, grad);
        const Weights::Entry& wt = w.find(u + "dec" + std::to_string(l) + ".weight");
        Weights::Entry& gw = grads.find(u + "dec" + std::to_string(l) + ".weight");
        Weights::Entry& gb = grads.find(u + "dec" + std::to_string(l) + ".bias");
        Tensor grad_cat;
        conv2d_backward(rec.dec_cat[l], wt.data, wt.shape[0], wt.shape[2], 1, grad, grad_cat,
                        gw.data, gb.data);
        const int up_c = cfg.level_filters(l + 1);
        Tensor grad_up(up_c, grad_cat.h, grad_cat.w);
        Tensor grad_skip(grad_cat.c - up_c, grad_cat.h, grad_cat.w);
        concat_backward(grad_cat, grad_up, grad_skip);
        for (std::size_t i = 0; i < grad_skip.size(); ++i) enc_grad[l].v[i] += grad_skip.v[i];
        Tensor grad_prev;
        upsample2_backward(grad_up, grad_prev);
        if (l + 1 <= L - 2) {
            grad = std::move(grad_prev); // continues as dL/d(dec_act[l+1])
        } else {
            for (std::size_t i = 0; i < grad_prev.size(); ++i)
                enc_grad[L - 1].v[i] += grad_prev.v[i];
        }
    }
    if (L == 1) enc_grad[0] = grad;

    // encoder chain, deepest first
    Tensor carried;
    for (int l = L - 1; l >= 0; --l) {
        Tensor g = std::move(enc_grad[l]);
        if (l < L - 1 && carried.size() > 0) {
            for (std::size_t i = 0; i < g.size(); ++i) g.v[i] += carried.v[i];
        }
        leaky_relu_backward(rec.enc_pre[l], cfg.leaky_slope, g);
        const Weights::Entry& wt = w.find(u + "enc" + std::to_string(l) + ".weight");
        Weights::Entry& gw = grads.find(u + "enc" + std::to_string(l) + ".weight");
        Weights::Entry& gb = grads.find(u + "enc" + std::to_string(l) + ".bias");
        const Tensor& input = (l == 0) ? rec.unet_in : rec.enc_act[l - 1];
        Tensor grad_in;
        conv2d_backward(input, wt.data, wt.shape[0], wt.shape[2], l == 0 ? 1 : 2, g, grad_in,
                        gw.data, gb.data);
        carried = std::move(grad_in);
    }
    return carried;
}

} // namespace

ComplexImage cascade_forward(const ComplexImage& x0_dp, const ComplexImage& x0_rp,
                             const SampleMask& m, const MultiCoilKSpace& k_dp,
                             const SensitivityMaps& maps, const Weights& w,
                             CascadeState* state) {
    const NetworkConfig& cfg = w.config;
    cfg.validate();
    if (!x0_dp.same_shape(x0_rp))
        throw std::invalid_argument("cascade_forward: branch inputs differ in shape");
    const int div = 1 << (cfg.unet_levels - 1);
    if (x0_dp.height() % div != 0 || x0_dp.width() % div != 0)
        throw std::invalid_argument("cascade_forward: dims must be divisible by 2^(levels-1)");

    if (state) state->units.assign(cfg.n_units, UnitRecord());

    ComplexImage x_dp = x0_dp;
    Tensor rp = to_tensor(x0_rp);
    for (int n = 0; n < cfg.n_units; ++n) {
        UnitRecord* rec = state ? &state->units[n] : nullptr;
        Tensor rp_next = resnet_block_forward(rp, w, n, cfg, rec);
        Tensor dp_t = to_tensor(x_dp);
        Tensor x4;
        concat_forward(dp_t, rp_next, x4);
        if (rec) rec->dp_in = std::move(dp_t);
        Tensor xt = unet_forward(x4, w, n, cfg, rec);
        ComplexImage x_tilde = to_image(xt);
        if (rec) rec->x_tilde = std::move(xt);
        x_dp = data_consistency(x_tilde, m, k_dp, maps);
        rp = std::move(rp_next);
    }
    if (state) state->output = x_dp;
    return x_dp;
}

ComplexImage single_branch_forward(const ComplexImage& x0_dp, const SampleMask& m,
                                   const MultiCoilKSpace& k_dp, const SensitivityMaps& maps,
                                   const Weights& w, CascadeState* state) {
    return cascade_forward(x0_dp, x0_dp, m, k_dp, maps, w, state);
}

void cascade_backward(const CascadeState& state, const ComplexImage& loss_grad,
                      const SampleMask& m, const SensitivityMaps& maps, const Weights& w,
                      Weights& grads) {
    const NetworkConfig& cfg = w.config;
    const int n_units = static_cast<int>(state.units.size());
    if (n_units != cfg.n_units)
        throw std::invalid_argument("cascade_backward: recorded state does not match config");

    ComplexImage grad_dp = loss_grad;
    Tensor carried_rp;
    for (int n = n_units - 1; n >= 0; --n) {
        const UnitRecord& rec = state.units[n];
        // DC layer: adjoint of its linear part (self-adjoint)
        const ComplexImage grad_xt = data_consistency_linear(grad_dp, m, maps);
        Tensor g = to_tensor(grad_xt);
        Tensor grad_x4 = unet_backward(rec, w, n, cfg, g, grads);
        Tensor grad_dp_t(2, grad_x4.h, grad_x4.w);
        Tensor grad_rp_t(2, grad_x4.h, grad_x4.w);
        concat_backward(grad_x4, grad_dp_t, grad_rp_t);
        if (carried_rp.size() > 0) {
            for (std::size_t i = 0; i < grad_rp_t.size(); ++i)
                grad_rp_t.v[i] += carried_rp.v[i];
        }
        carried_rp = resnet_block_backward(rec, w, n, cfg, grad_rp_t, grads);
        grad_dp = to_image(grad_dp_t);
    }
}

} // namespace kmoco::net
