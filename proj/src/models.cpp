#include "fairrep/models.hpp"

#include <cmath>
#include <string>

#include "fairrep/error.hpp"

namespace fairrep {

Layer make_layer(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Matrix W(out, in);
  for (double& w : W.values()) w = uniform(rng, -bound, bound);
  Matrix b(1, out);
  for (double& v : b.values()) v = uniform(rng, -bound, bound);
  return Layer{ParamBlock(std::move(W)), ParamBlock(std::move(b))};
}

std::string_view to_string(HeadArch a) {
  switch (a) {
    case HeadArch::linear: return "linear";
    case HeadArch::leakyrelu1: return "leakyrelu1";
    case HeadArch::sigmoid1: return "sigmoid1";
    case HeadArch::sigmoid2: return "sigmoid2";
  }
  return "?";
}

HeadArch parse_head_arch(std::string_view name) {
  for (HeadArch a : kAllHeads) {
    if (to_string(a) == name) return a;
  }
  throw InputError("unknown head architecture '" + std::string(name) +
                   "' (expected linear, leakyrelu1, sigmoid1 or sigmoid2)");
}

EncoderParams make_encoder(std::size_t d, std::size_t m, bool include_s, std::uint64_t seed) {
  if (d == 0 || m == 0) throw InputError("encoder needs d >= 1 and m >= 1");
  Rng rng(seed);
  return EncoderParams{make_layer(d + (include_s ? 1 : 0), m, rng), kLeakySlope, include_s};
}

DecoderParams make_decoder(std::size_t m, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return DecoderParams{make_layer(m, d, rng)};
}

HeadParams make_head(HeadArch arch, std::size_t m, std::size_t hidden, std::uint64_t seed) {
  if (hidden == 0) hidden = m;
  Rng rng(seed);
  HeadParams h{.arch = arch};
  switch (arch) {
    case HeadArch::linear:
      h.layers.push_back(make_layer(m, 1, rng));
      break;
    case HeadArch::leakyrelu1:
    case HeadArch::sigmoid1:
      h.layers.push_back(make_layer(m, hidden, rng));
      h.layers.push_back(make_layer(hidden, 1, rng));
      break;
    case HeadArch::sigmoid2:
      h.layers.push_back(make_layer(m, hidden, rng));
      h.layers.push_back(make_layer(hidden, hidden, rng));
      h.layers.push_back(make_layer(hidden, 1, rng));
      break;
  }
  return h;
}

Matrix encoder_input(const EncoderParams& enc, const Matrix& X, std::span<const std::uint8_t> s) {
  Matrix in = X;
  if (enc.include_s) {
    if (s.size() != X.rows()) {
      throw ShapeError("encoder: s has " + std::to_string(s.size()) + " entries for X " + X.shape_string());
    }
    in = append_column(X, s);
  }
  if (in.cols() != enc.input_dim()) {
    throw ShapeError("encoder expects " + std::to_string(enc.input_dim()) + " input columns, got " +
                     in.shape_string());
  }
  return in;
}

Matrix encode(const EncoderParams& enc, const Matrix& X, std::span<const std::uint8_t> s) {
  return leaky_relu(affine(enc.layer.W.value, enc.layer.b.value.values(), encoder_input(enc, X, s)), enc.slope);
}

Matrix decode(const DecoderParams& dec, const Matrix& Z) {
  return affine(dec.layer.W.value, dec.layer.b.value.values(), Z);
}

namespace {

// Hidden layers get the activation, the output layer stays affine.
template <typename Head, typename Affine, typename Act, typename X>
X run_head(Head& head, Affine&& aff, Act&& act, X x) {
  for (std::size_t k = 0; k + 1 < head.layers.size(); ++k) x = act(aff(head.layers[k], x));
  return aff(head.layers.back(), x);
}

}  // namespace

Matrix head_logits(const HeadParams& head, const Matrix& Z) {
  auto aff = [](const Layer& l, const Matrix& x) { return affine(l.W.value, l.b.value.values(), x); };
  auto act = [&](const Matrix& x) {
    return head.arch == HeadArch::leakyrelu1 ? leaky_relu(x, head.slope) : sigmoid(x);
  };
  return run_head(head, aff, act, Z);
}

Tape::Var encode(Tape& tape, EncoderParams& enc, Tape::Var input) {
  auto W = tape.param(enc.layer.W);
  auto b = tape.param(enc.layer.b);
  return tape.leaky_relu(tape.affine(W, b, input), enc.slope);
}

Tape::Var decode(Tape& tape, DecoderParams& dec, Tape::Var z) {
  return tape.affine(tape.param(dec.layer.W), tape.param(dec.layer.b), z);
}

Tape::Var head_logits(Tape& tape, HeadParams& head, Tape::Var z) {
  auto aff = [&](Layer& l, Tape::Var x) { return tape.affine(tape.param(l.W), tape.param(l.b), x); };
  auto act = [&](Tape::Var x) {
    return head.arch == HeadArch::leakyrelu1 ? tape.leaky_relu(x, head.slope) : tape.sigmoid(x);
  };
  return run_head(head, aff, act, z);
}

std::vector<ParamBlock*> blocks(EncoderParams& enc) { return {&enc.layer.W, &enc.layer.b}; }
std::vector<ParamBlock*> blocks(DecoderParams& dec) { return {&dec.layer.W, &dec.layer.b}; }
std::vector<ParamBlock*> blocks(HeadParams& head) {
  std::vector<ParamBlock*> out;
  for (auto& l : head.layers) {
    out.push_back(&l.W);
    out.push_back(&l.b);
  }
  return out;
}

}  // namespace fairrep
