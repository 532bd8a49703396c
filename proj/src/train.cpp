#include "kmoco/train.hpp"

#include "kmoco/parallel.hpp"
#include "kmoco/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kmoco {

using net::CascadeState;
using net::Variant;
using net::Weights;

PreparedSample prepare_sample(const TrainSample& s, const SensitivityMaps& maps) {
    PreparedSample p;
    auto [k_dp, k_rp] = split(s.k_cor, s.mask);
    p.x0_dp = zero_filled_recon(k_dp, maps);
    p.x0_rp = zero_filled_recon(k_rp, maps);
    p.mask = s.mask;
    p.k_dp = std::move(k_dp);
    p.y_dp = &s.y_dp;
    return p;
}

namespace {

double sample_grad(const PreparedSample& ps, const SensitivityMaps& maps, const Weights& w,
                   const LossParams& lp, Weights& grads) {
    CascadeState state;
    const ComplexImage& x0_rp = w.variant == Variant::SingleBranch ? ps.x0_dp : ps.x0_rp;
    const ComplexImage out =
        net::cascade_forward(ps.x0_dp, x0_rp, ps.mask, ps.k_dp, maps, w, &state);
    ComplexImage loss_grad;
    const double loss = total_loss(out, *ps.y_dp, lp, &loss_grad);
    net::cascade_backward(state, loss_grad, ps.mask, maps, w, grads);
    return loss;
}

double sample_loss(const PreparedSample& ps, const SensitivityMaps& maps, const Weights& w,
                   const LossParams& lp) {
    const ComplexImage& x0_rp = w.variant == Variant::SingleBranch ? ps.x0_dp : ps.x0_rp;
    const ComplexImage out = net::cascade_forward(ps.x0_dp, x0_rp, ps.mask, ps.k_dp, maps, w);
    return total_loss(out, *ps.y_dp, lp);
}

} // namespace

Weights train(const Dataset& train_set, const Dataset& val_set, const ModelSpec& model,
              const OptimConfig& opt, std::vector<EpochLog>* log) {
    if (train_set.samples.empty()) throw std::invalid_argument("train: empty dataset");
    model.config.validate();

    const LossParams lp;
    Weights w = net::init_weights(model.config, model.variant, opt.seed);

    std::vector<PreparedSample> train_ps(train_set.samples.size());
    parallel_for(static_cast<int>(train_set.samples.size()), opt.threads, [&](int i) {
        train_ps[i] = prepare_sample(train_set.samples[i], train_set.maps);
    });
    std::vector<PreparedSample> val_ps(val_set.samples.size());
    parallel_for(static_cast<int>(val_set.samples.size()), opt.threads, [&](int i) {
        val_ps[i] = prepare_sample(val_set.samples[i], val_set.maps);
    });

    Weights m1 = w.zeros_like();
    Weights m2 = w.zeros_like();
    Weights best = w;
    double best_val = std::numeric_limits<double>::infinity();
    long long step = 0;

    const int n = static_cast<int>(train_ps.size());
    const int batch = std::max(1, std::min(opt.batch_size, n));
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);

    for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
        // deterministic per-epoch shuffle
        Rng shuffle_rng(Rng::derive_seed(opt.seed, 0x65706f6368ULL + epoch));
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(shuffle_rng.uniform_int(i + 1));
            std::swap(idx[i], idx[j]);
        }

        double epoch_loss = 0.0;
        int epoch_count = 0;
        for (int start = 0; start < n; start += batch) {
            const int count = std::min(batch, n - start);
            std::vector<Weights> grads(count, w.zeros_like());
            std::vector<double> losses(count, 0.0);
            parallel_for(count, opt.threads, [&](int k) {
                losses[k] =
                    sample_grad(train_ps[idx[start + k]], train_set.maps, w, lp, grads[k]);
            });

            // ordered reduction keeps the step independent of the thread count
            Weights& g = grads[0];
            for (int k = 1; k < count; ++k) {
                for (std::size_t e = 0; e < g.entries.size(); ++e) {
                    double* dst = g.entries[e].data.data();
                    const double* src = grads[k].entries[e].data.data();
                    for (std::size_t q = 0; q < g.entries[e].data.size(); ++q) dst[q] += src[q];
                }
            }
            const double inv = 1.0 / count;
            double batch_loss = 0.0;
            for (int k = 0; k < count; ++k) batch_loss += losses[k];
            batch_loss *= inv;
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train: diverged (non-finite loss) at epoch " +
                                         std::to_string(epoch));
            epoch_loss += batch_loss * count;
            epoch_count += count;

            ++step;
            const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(step));
            for (std::size_t e = 0; e < w.entries.size(); ++e) {
                double* wp = w.entries[e].data.data();
                double* mp = m1.entries[e].data.data();
                double* vp = m2.entries[e].data.data();
                const double* gp = g.entries[e].data.data();
                for (std::size_t q = 0; q < w.entries[e].data.size(); ++q) {
                    const double gv = gp[q] * inv;
                    mp[q] = opt.beta1 * mp[q] + (1.0 - opt.beta1) * gv;
                    vp[q] = opt.beta2 * vp[q] + (1.0 - opt.beta2) * gv * gv;
                    wp[q] -= opt.lr * (mp[q] / bc1) / (std::sqrt(vp[q] / bc2) + opt.epsilon);
                }
            }
        }
        const double train_loss = epoch_loss / epoch_count;

        double val_loss = std::numeric_limits<double>::quiet_NaN();
        if (!val_ps.empty()) {
            std::vector<double> vl(val_ps.size(), 0.0);
            parallel_for(static_cast<int>(val_ps.size()), opt.threads, [&](int i) {
                vl[i] = sample_loss(val_ps[i], val_set.maps, w, lp);
            });
            val_loss = std::accumulate(vl.begin(), vl.end(), 0.0) / vl.size();
            if (val_loss < best_val) {
                best_val = val_loss;
                best = w;
            }
        }
        if (log) log->push_back({epoch, train_loss, val_loss});
    }
    return val_ps.empty() ? w : best;
}

std::string eval_variant_name(EvalVariant v) {
    switch (v) {
        case EvalVariant::ZeroFilled: return "zero_filled";
        case EvalVariant::SingleBranch: return "single_branch";
        case EvalVariant::TwoBranch: return "two_branch";
    }
    return "zero_filled";
}

std::vector<SampleMetrics> evaluate(const Dataset& ds, EvalVariant variant,
                                    const Weights* weights, int threads) {
    if (ds.samples.empty()) throw std::invalid_argument("evaluate: empty dataset");
    if (variant != EvalVariant::ZeroFilled && weights == nullptr)
        throw std::invalid_argument("evaluate: variant requires weights");
    const LossParams lp;

    std::vector<SampleMetrics> rows(ds.samples.size());
    parallel_for(static_cast<int>(ds.samples.size()), threads, [&](int i) {
        const PreparedSample ps = prepare_sample(ds.samples[i], ds.maps);
        ComplexImage out;
        switch (variant) {
            case EvalVariant::ZeroFilled: out = ps.x0_dp; break;
            case EvalVariant::SingleBranch:
                out = net::single_branch_forward(ps.x0_dp, ps.mask, ps.k_dp, ds.maps, *weights);
                break;
            case EvalVariant::TwoBranch:
                out = net::cascade_forward(ps.x0_dp, ps.x0_rp, ps.mask, ps.k_dp, ds.maps,
                                           *weights);
                break;
        }
        const net::Tensor out_mag = magnitude_image(out);
        const net::Tensor tgt_mag = magnitude_image(*ps.y_dp);
        SampleMetrics& m = rows[i];
        m.sample_id = i;
        m.variant = variant;
        m.nmse = nmse(out, *ps.y_dp);
        double num = 0.0, den = 0.0;
        for (std::size_t q = 0; q < out_mag.size(); ++q) {
            const double d = out_mag.v[q] - tgt_mag.v[q];
            num += d * d;
            den += tgt_mag.v[q] * tgt_mag.v[q];
        }
        m.nmse_mag = num / den;
        m.ssim = ssim(out_mag, tgt_mag, lp);
    });
    return rows;
}

MetricsSummary summarize(const std::vector<SampleMetrics>& rows, EvalVariant variant,
                         const std::string& scan_order) {
    MetricsSummary s;
    s.variant = variant;
    s.scan_order = scan_order;
    for (const SampleMetrics& r : rows) {
        s.mean_nmse += r.nmse;
        s.mean_nmse_mag += r.nmse_mag;
        s.mean_ssim += r.ssim;
        ++s.n;
    }
    if (s.n > 0) {
        s.mean_nmse /= s.n;
        s.mean_nmse_mag /= s.n;
        s.mean_ssim /= s.n;
    }
    return s;
}

double mean_loss(const Dataset& ds, const Weights& w, int threads) {
    if (ds.samples.empty()) throw std::invalid_argument("mean_loss: empty dataset");
    const LossParams lp;
    std::vector<double> losses(ds.samples.size(), 0.0);
    parallel_for(static_cast<int>(ds.samples.size()), threads, [&](int i) {
        const PreparedSample ps = prepare_sample(ds.samples[i], ds.maps);
        losses[i] = sample_loss(ps, ds.maps, w, lp);
    });
    return std::accumulate(losses.begin(), losses.end(), 0.0) / losses.size();
}

} // namespace kmoco
