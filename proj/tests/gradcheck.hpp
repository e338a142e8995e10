#pragma once
// Tape gradients of every model path against central differences of the
// oracle forward. Shared by the unit tests and the acceptance binary.
#include <string>
#include <vector>

#include "fairrep/models.hpp"
#include "fairrep/random.hpp"
#include "fairrep/tape.hpp"
#include "oracle.hpp"

namespace gradcheck {

struct Outcome {
  std::string path;
  double worst = 0.0;  // max relative error over all entries and draws
  std::size_t entries = 0;
};

inline oracle::Mat to_oracle(const fairrep::Matrix& m) {
  oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t k = 0; k < m.cols(); ++k) out[i][k] = m(i, k);
  return out;
}

inline oracle::Mat layer(const fairrep::Layer& l, const oracle::Mat& x) {
  return oracle::affine(to_oracle(l.W.value), l.b.value.values(), x);
}

inline oracle::Mat encode(const fairrep::EncoderParams& e, const oracle::Mat& in) {
  return oracle::map(layer(e.layer, in), [&](double v) { return oracle::leaky(v, e.slope); });
}

inline oracle::Vec head(const fairrep::HeadParams& h, oracle::Mat x) {
  for (std::size_t k = 0; k + 1 < h.layers.size(); ++k) {
    x = layer(h.layers[k], x);
    x = h.arch == fairrep::HeadArch::leakyrelu1 ? oracle::map(x, [&](double v) { return oracle::leaky(v, h.slope); })
                                                : oracle::map(x, oracle::sigmoid);
  }
  x = layer(h.layers.back(), x);
  oracle::Vec out;
  for (const auto& r : x) out.push_back(r[0]);
  return out;
}

struct Draw {
  fairrep::Matrix X;
  std::vector<std::uint8_t> s, y;
  fairrep::Matrix input;  // [X | s]
};

inline Draw make_draw(std::uint64_t seed, std::size_t n, std::size_t d) {
  fairrep::Rng rng(seed);
  std::normal_distribution<double> g;
  Draw out{fairrep::Matrix(n, d), {}, {}, {}};
  for (auto& v : out.X.values()) v = g(rng);
  for (std::size_t i = 0; i < n; ++i) {
    out.s.push_back(i % 2);  // both groups always present
    out.y.push_back(rng() % 2);
  }
  out.input = fairrep::append_column(out.X, out.s);
  return out;
}

inline void compare(Outcome& o, const std::vector<fairrep::ParamBlock*>& ps, const std::function<double()>& f,
                    double h) {
  for (auto* p : ps) {
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      const double fd = oracle::central_diff(f, p->value[k], h);
      o.worst = std::max(o.worst, oracle::rel_err(p->grad[k], fd));
      ++o.entries;
    }
  }
}

// Paths: encoder, decoder, head:<arch> for all four heads, discriminator
// (sigmoid gap through the encoder, also w.r.t. theta and mu), and the full
// supervised objective.
inline std::vector<Outcome> run(std::size_t draws, double h = 1e-5, std::uint64_t seed = 0) {
  using namespace fairrep;
  std::vector<Outcome> out;
  auto find = [&](const std::string& name) -> Outcome& {
    for (auto& o : out)
      if (o.path == name) return o;
    out.push_back({name});
    return out.back();
  };
  const std::size_t n = 6, d = 3, m = 4;
  for (std::size_t r = 0; r < draws; ++r) {
    const std::uint64_t s0 = derive_seed(seed, r);
    Draw dr = make_draw(s0, n, d);
    const oracle::Mat in = to_oracle(dr.input);
    const oracle::Mat xo = to_oracle(dr.X);
    EncoderParams enc = make_encoder(d, m, true, derive_seed(s0, 1));
    Rng trng(derive_seed(s0, 2));
    Matrix target(n, m);
    for (auto& v : target.values()) v = uniform(trng, -1, 1);

    {  // encoder
      for (auto* p : blocks(enc)) p->zero_grad();
      Tape t;
      t.backward(t.squared_error(t.constant(target), encode(t, enc, t.constant(dr.input))));
      compare(find("encoder"), blocks(enc), [&] { return oracle::sq_error(encode(enc, in), to_oracle(target)); }, h);
    }
    const Matrix Z = fairrep::encode(enc, dr.X, dr.s);
    const oracle::Mat zo = to_oracle(Z);
    {  // decoder
      DecoderParams dec = make_decoder(m, d, derive_seed(s0, 3));
      Tape t;
      t.backward(t.squared_error(t.constant(dr.X), decode(t, dec, t.constant(Z))));
      compare(find("decoder"), blocks(dec), [&] { return oracle::sq_error(xo, layer(dec.layer, zo)); }, h);
    }
    for (HeadArch a : kAllHeads) {
      HeadParams hp = make_head(a, m, 3, derive_seed(s0, 4));
      Tape t;
      t.backward(t.bce_with_logits(head_logits(t, hp, t.constant(Z)), dr.y));
      compare(find("head:" + std::string(to_string(a))), blocks(hp), [&] { return oracle::bce(head(hp, zo), dr.y); },
              h);
    }
    std::vector<std::size_t> r0, r1;
    for (std::size_t i = 0; i < n; ++i) (dr.s[i] ? r1 : r0).push_back(i);
    ParamBlock theta(Matrix(1, m));
    ParamBlock mu(Matrix(1, 1));
    for (auto& v : theta.value.values()) v = uniform(trng, -2, 2);
    mu.value[0] = uniform(trng, -1, 1);
    auto oracle_gap = [&] {
      const oracle::Mat z = encode(enc, in);
      oracle::Mat z0, z1;
      for (std::size_t i = 0; i < n; ++i) (dr.s[i] ? z1 : z0).push_back(z[i]);
      return oracle::gap(theta.value.values(), mu.value[0], z0, z1);
    };
    {  // discriminator path
      for (auto* p : blocks(enc)) p->zero_grad();
      theta.zero_grad();
      mu.zero_grad();
      Tape t;
      auto z = encode(t, enc, t.constant(dr.input));
      auto sc = t.sigmoid(t.affine(t.param(theta), t.param(mu), z));
      t.backward(t.abs(t.combine(t.mean_rows(sc, r0), 1.0, t.mean_rows(sc, r1), -1.0)));
      std::vector<ParamBlock*> ps = blocks(enc);
      ps.push_back(&theta);
      ps.push_back(&mu);
      compare(find("discriminator"), ps, oracle_gap, h);
    }
    {  // supervised objective: bce + lambda * gap
      HeadParams hp = make_head(HeadArch::leakyrelu1, m, 3, derive_seed(s0, 5));
      std::vector<ParamBlock*> ps = blocks(enc);
      for (auto* p : blocks(hp)) ps.push_back(p);
      for (auto* p : ps) p->zero_grad();
      Tape t;
      auto z = encode(t, enc, t.constant(dr.input));
      auto task = t.bce_with_logits(head_logits(t, hp, z), dr.y);
      auto sc = t.sigmoid(t.affine(t.constant(theta.value), t.constant(mu.value), z));
      auto gap = t.abs(t.combine(t.mean_rows(sc, r0), 1.0, t.mean_rows(sc, r1), -1.0));
      t.backward(t.combine(task, 1.0, gap, 3.0));
      compare(find("objective"), ps,
              [&] { return oracle::bce(head(hp, encode(enc, in)), dr.y) + 3.0 * oracle_gap(); }, h);
    }
  }
  return out;
}

}  // namespace gradcheck
