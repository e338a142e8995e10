#include <gtest/gtest.h>

#include "fairrep/error.hpp"
#include "fairrep/models.hpp"
#include "gradcheck.hpp"

using namespace fairrep;

TEST(Gradients, AllPathsMatchFiniteDifferences) {
  for (const auto& o : gradcheck::run(20)) {
    EXPECT_LT(o.worst, 1e-4) << o.path;
    EXPECT_GT(o.entries, 0u) << o.path;
  }
}

TEST(Encoder, NullParamsGiveZero) {
  EncoderParams e = make_encoder(2, 3, false, 1);
  e.layer.W.value.fill(0);
  e.layer.b.value.fill(0);
  const Matrix Z = encode(e, Matrix::from_rows({{1, 2}, {3, 4}}), {});
  EXPECT_EQ(Z, Matrix(2, 3));
}

TEST(Encoder, IdentityOnNonnegativeInput) {
  EncoderParams e = make_encoder(2, 2, false, 1);
  e.layer.W.value = Matrix::identity(2);
  e.layer.b.value.fill(0);
  const Matrix X = Matrix::from_rows({{1, 2}, {0, 4}});
  EXPECT_EQ(encode(e, X, {}), X);
}

TEST(Encoder, HandEvaluation) {
  EncoderParams e = make_encoder(1, 1, true, 1);
  e.layer.W.value = Matrix::from_rows({{2, -3}});  // x weight, s weight
  e.layer.b.value = Matrix::from_rows({{0.5}});
  const std::vector<std::uint8_t> s{1};
  // 2*1 - 3*1 + 0.5 = -0.5 -> leaky -0.005
  EXPECT_DOUBLE_EQ(encode(e, Matrix::from_rows({{1}}), s)(0, 0), -0.005);
}

TEST(Encoder, ShapeChecks) {
  EncoderParams e = make_encoder(3, 2, true, 1);
  EXPECT_THROW(encode(e, Matrix(2, 2), std::vector<std::uint8_t>{0, 1}), ShapeError);
  EXPECT_THROW(encode(e, Matrix(2, 3), std::vector<std::uint8_t>{0}), ShapeError);
}

TEST(Heads, ParseAndShape) {
  for (HeadArch a : kAllHeads) {
    EXPECT_EQ(parse_head_arch(to_string(a)), a);
    HeadParams h = make_head(a, 5, 0, 3);
    EXPECT_EQ(head_logits(h, Matrix(7, 5, 0.3)).rows(), 7u);
    EXPECT_EQ(head_logits(h, Matrix(7, 5, 0.3)).cols(), 1u);
  }
  EXPECT_EQ(make_head(HeadArch::sigmoid2, 5, 0, 3).layers.size(), 3u);
  EXPECT_THROW(parse_head_arch("mlp"), InputError);
}

TEST(Models, InitIsDeterministic) {
  EXPECT_EQ(make_encoder(4, 6, true, 9).layer.W.value, make_encoder(4, 6, true, 9).layer.W.value);
  EXPECT_NE(make_encoder(4, 6, true, 9).layer.W.value, make_encoder(4, 6, true, 10).layer.W.value);
  const auto e = make_encoder(4, 6, true, 9);
  for (double v : e.layer.W.value.values()) EXPECT_LE(std::abs(v), 1 / std::sqrt(5.0));
}
