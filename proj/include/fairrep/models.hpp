#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fairrep/matrix.hpp"
#include "fairrep/optimizer.hpp"
#include "fairrep/random.hpp"
#include "fairrep/tape.hpp"

namespace fairrep {

inline constexpr double kLeakySlope = 0.01;

// One affine layer: W is (out x in), b is 1 x out.
struct Layer {
  ParamBlock W;
  ParamBlock b;

  std::size_t in() const { return W.value.cols(); }
  std::size_t out() const { return W.value.rows(); }
};

// Weights and biases ~ U(-1/sqrt(in), 1/sqrt(in)).
Layer make_layer(std::size_t in, std::size_t out, Rng& rng);

// Z = leaky_relu(W [X | s] + b), the s column only when include_s.
struct EncoderParams {
  Layer layer;
  double slope = kLeakySlope;
  bool include_s = true;

  std::size_t input_dim() const { return layer.in(); }
  std::size_t dim() const { return layer.out(); }
};

// Linear map back to the raw features (x only).
struct DecoderParams {
  Layer layer;
};

enum class HeadArch { linear, leakyrelu1, sigmoid1, sigmoid2 };
std::string_view to_string(HeadArch a);
HeadArch parse_head_arch(std::string_view name);
inline constexpr HeadArch kAllHeads[] = {HeadArch::linear, HeadArch::leakyrelu1, HeadArch::sigmoid1,
                                         HeadArch::sigmoid2};

// Scalar-logit prediction model. Hidden layers have width `hidden`.
struct HeadParams {
  HeadArch arch = HeadArch::leakyrelu1;
  std::vector<Layer> layers;
  double slope = kLeakySlope;
};

EncoderParams make_encoder(std::size_t d, std::size_t m, bool include_s, std::uint64_t seed);
DecoderParams make_decoder(std::size_t m, std::size_t d, std::uint64_t seed);
HeadParams make_head(HeadArch arch, std::size_t m, std::size_t hidden, std::uint64_t seed);

// Encoder input [X | s] (or X alone), checked against the encoder width.
Matrix encoder_input(const EncoderParams& enc, const Matrix& X, std::span<const std::uint8_t> s);
Matrix encode(const EncoderParams& enc, const Matrix& X, std::span<const std::uint8_t> s);
Matrix decode(const DecoderParams& dec, const Matrix& Z);
// n x 1 logits.
Matrix head_logits(const HeadParams& head, const Matrix& Z);

// Tape versions; parameters are bound so backward() fills their grads.
Tape::Var encode(Tape& tape, EncoderParams& enc, Tape::Var input);
Tape::Var decode(Tape& tape, DecoderParams& dec, Tape::Var z);
Tape::Var head_logits(Tape& tape, HeadParams& head, Tape::Var z);

std::vector<ParamBlock*> blocks(EncoderParams& enc);
std::vector<ParamBlock*> blocks(DecoderParams& dec);
std::vector<ParamBlock*> blocks(HeadParams& head);

}  // namespace fairrep
