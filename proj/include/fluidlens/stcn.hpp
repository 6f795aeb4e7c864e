#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fluidlens/image.hpp"
#include "fluidlens/rng.hpp"
#include "fluidlens/tensor.hpp"

namespace fluidlens {

enum class StcnVariant { kStacked, kNonStacked };

enum class Loss { kL1, kMse, kRmse };

struct StcnConfig {
    StcnVariant variant = StcnVariant::kNonStacked;
    int layers = 1;            // L
    int blocks_per_layer = 1;  // B; block BN uses dilation 2^(BN-1)
    int filters = 32;          // 32 for sequences, 128 for single images
    int kernel = 3;
    int seq_len = 1;  // T
    int channels = 3; // C
    double residual_scale = 0.1;
    std::vector<double> mean_rgb = {0.0, 0.0, 0.0};

    int dilation_of_block(int block_index_in_layer) const {
        return 1 << block_index_in_layer;  // BN = index + 1
    }
    // Temporal convolutions only exist for the non-stacked variant with T > 1.
    bool temporal_kernel() const {
        return variant == StcnVariant::kNonStacked && seq_len > 1;
    }
    int input_channels() const {
        return variant == StcnVariant::kStacked ? channels * seq_len : channels;
    }
};

struct ConvParams {
    Tensor weights;  // [Cout, Cin, kt, kh, kw]
    std::vector<double> bias;
};

struct StcnParameters {
    ConvParams entry;                // kernel 3, dilation 1
    std::vector<ConvParams> blocks;  // 2 convs per block, layer-major order
    ConvParams final;                // 1x1x1 projection to image channels

    // Weight/bias buffers in declaration order.
    std::vector<std::vector<double>*> buffers();
    std::vector<const std::vector<double>*> buffers() const;
    std::size_t parameter_count() const;
};

// Seeded He-style uniform fan-in initialization.
StcnParameters init_parameters(const StcnConfig& config, std::uint64_t seed);
StcnParameters zero_parameters(const StcnConfig& config);

// General dilated cross-correlation with zero padding; kernel extent per axis
// is taken from the weight shape (1 => no padding, 3 => pad = dilation).
// input [Cin, T, H, W], weights [Cout, Cin, kt, kh, kw] -> [Cout, T, H, W].
Tensor conv_nd(const Tensor& input, const Tensor& weights,
               const std::vector<double>& bias, int dilation);

void conv_nd_backward(const Tensor& input, const Tensor& weights,
                      const Tensor& grad_out, int dilation, Tensor& grad_input,
                      Tensor& grad_weights, std::vector<double>& grad_bias);

// out = input + residual_scale * conv2(relu(conv1(input)))
Tensor temporal_block(const Tensor& input, const ConvParams& conv1,
                      const ConvParams& conv2, int dilation,
                      double residual_scale);

// Frames -> normalized network input tensor for the configured variant.
Tensor assemble_input(const StcnConfig& config, const std::vector<Image>& seq);

Image stcn_forward(const StcnConfig& config, const StcnParameters& params,
                   const std::vector<Image>& seq);

// Network output before clamping/mean-add bookkeeping, as a [C,1,H,W] tensor
// with mean_rgb re-added. Used by the loss path (no clamping there).
Tensor stcn_forward_raw(const StcnConfig& config, const StcnParameters& params,
                        const std::vector<Image>& seq);

struct Sample {
    std::vector<Image> seq;
    Image target;
};

// Mean batch loss on the 0-255 scale plus exact analytic gradients.
// Throws DivergenceError if the loss is non-finite.
double loss_and_gradients(const StcnConfig& config, const StcnParameters& params,
                          const std::vector<Sample>& batch, Loss loss,
                          StcnParameters& grads);

double global_grad_norm(const StcnParameters& grads);

// Scales all gradients to max_norm if the global L2 norm exceeds it.
void clip_gradients(StcnParameters& grads, double max_norm = 1.0);

struct OptimState {
    std::int64_t step = 0;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<std::vector<double>> m;      // first moments
    std::vector<std::vector<double>> v;      // second moments
    std::vector<std::vector<double>> v_max;  // amsgrad running max
};

OptimState make_optim_state(const StcnParameters& params, double learning_rate);

void adam_amsgrad_step(OptimState& state, StcnParameters& params,
                       const StcnParameters& grads);

struct ReceptiveField {
    int spatial = 0;
    int temporal = 0;  // 1 when no temporal convolutions
};

ReceptiveField receptive_field(const StcnConfig& config);

// Random window + 50% reversal + consistent 50% h/v flips.
Sample augment(const std::vector<Image>& video, const Image& target, int seq_len,
               Rng& rng);

Image flip_horizontal(const Image& img);
Image flip_vertical(const Image& img);

void save_parameters(const StcnConfig& config, const StcnParameters& params,
                     const std::string& path);
std::pair<StcnConfig, StcnParameters> load_parameters(const std::string& path);

}  // namespace fluidlens
