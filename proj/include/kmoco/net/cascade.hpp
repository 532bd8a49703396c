#pragma once

#include "kmoco/net/layers.hpp"
#include "kmoco/partition.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace kmoco::net {

// Architecture of the cascaded two-branch corrector. Paper-scale values are
// 10 units / 64 filters / 6 levels rising 64..512; the desk-scale defaults
// below keep training tractable on a CPU.
struct NetworkConfig {
    int n_units = 2;
    int resnet_filters = 16;
    int resnet_layers = 3;
    double leaky_slope = 0.2;
    int unet_levels = 3;
    int unet_base_filters = 16;
    int unet_max_filters = 512;
    int kernel_size = 3;

    static NetworkConfig paper_scale();
    static NetworkConfig desk_scale();

    void validate() const;
    // width of the encoder at level l: min(base * 2^l, max)
    int level_filters(int level) const;
};

enum class Variant { TwoBranch, SingleBranch };
std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Flat named-parameter store. Shapes are derivable from NetworkConfig alone;
// entry order is the canonical enumeration used by the optimizer.
struct Weights {
    struct Entry {
        std::string name;
        std::vector<int> shape;
        std::vector<double> data;
        std::size_t size() const { return data.size(); }
    };

    NetworkConfig config;
    Variant variant = Variant::TwoBranch;
    std::vector<Entry> entries;

    std::size_t parameter_count() const;
    Entry& find(const std::string& name);
    const Entry& find(const std::string& name) const;
    // zero-filled copy with identical structure (gradient / moment buffers)
    Weights zeros_like() const;
};

// Canonical parameter layout for a config; seeded variance-scaling (fan-in)
// init for kernels, zero biases. Zero-seed init_zero gives all-zero weights.
Weights init_weights(const NetworkConfig& cfg, Variant variant, std::uint64_t seed);
Weights init_weights_zero(const NetworkConfig& cfg, Variant variant);

// Recorded intermediates of one forward pass, consumed by cascade_backward.
struct UnitRecord {
    Tensor rp_in;                // branch input to this unit
    std::vector<Tensor> rn_pre;  // resnet conv outputs (lrelu inputs)
    std::vector<Tensor> rn_act;  // activated resnet intermediates
    Tensor rp_out;               // x_n^RP
    Tensor dp_in;                // x_{n-1}^DP
    Tensor unet_in;              // 4-channel concatenation
    std::vector<Tensor> enc_pre; // encoder conv outputs
    std::vector<Tensor> enc_act; // activated encoder outputs
    std::vector<Tensor> dec_cat; // decoder concat inputs, indexed by level
    std::vector<Tensor> dec_pre;
    std::vector<Tensor> dec_act;
    Tensor x_tilde;              // U-Net output (DC input)
};

struct CascadeState {
    std::vector<UnitRecord> units;
    ComplexImage output;
};

// ResNet block: conv(2->F) -> LReLU -> [conv(F->F) -> LReLU]* -> conv(F->2),
// plus an identity skip from input to output.
Tensor resnet_block_forward(const Tensor& x_rp, const Weights& w, int unit,
                            const NetworkConfig& cfg, UnitRecord* rec = nullptr);

// U-Net over the 4-channel concatenation; one conv per scale, stride-2
// encoder, nearest-neighbor x2 decoder with skip concatenation, 1x1 output.
Tensor unet_forward(const Tensor& x4, const Weights& w, int unit, const NetworkConfig& cfg,
                    UnitRecord* rec = nullptr);

// Full cascade. x0_dp / x0_rp are the zero-filled branch reconstructions.
ComplexImage cascade_forward(const ComplexImage& x0_dp, const ComplexImage& x0_rp,
                             const SampleMask& m, const MultiCoilKSpace& k_dp,
                             const SensitivityMaps& maps, const Weights& w,
                             CascadeState* state = nullptr);

// The ablation: the DP image feeds both branches. Identical parameter count.
ComplexImage single_branch_forward(const ComplexImage& x0_dp, const SampleMask& m,
                                   const MultiCoilKSpace& k_dp, const SensitivityMaps& maps,
                                   const Weights& w, CascadeState* state = nullptr);

// Reverse-mode gradients for every parameter, accumulated into `grads`
// (same structure as w). `loss_grad` is dL/d(output) as a complex image
// (real and imaginary channels differentiated independently).
void cascade_backward(const CascadeState& state, const ComplexImage& loss_grad,
                      const SampleMask& m, const SensitivityMaps& maps, const Weights& w,
                      Weights& grads);

// Portable binary container: magic, config echo, named f32 tensors with
// explicit shapes. Save/load round trips are byte-identical.
void save_weights(const Weights& w, std::ostream& out);
void save_weights_file(const Weights& w, const std::string& path);
Weights load_weights(std::istream& in);
Weights load_weights_file(const std::string& path);

} // namespace kmoco::net
