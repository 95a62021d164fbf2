#include <gtest/gtest.h>

#include "lpvstab/lpvstab.hpp"
#include "oracles.hpp"

using namespace lpvstab;

namespace {

Matrix random_matrix(SplitRng& rng, int r, int c) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

SimplexPoint random_point(SplitRng& rng, const SimplexSignature& sig) {
  SimplexPoint p;
  for (int s = 0; s < sig.num_simplexes(); ++s) p.coordinates.push_back(rng.simplex(sig.vertices(s)));
  return p;
}

MatrixPolynomial random_affine(SplitRng& rng, const SimplexSignature& sig, int simplex, int r, int c) {
  std::vector<Matrix> verts;
  for (int l = 0; l < sig.vertices(simplex); ++l) verts.push_back(random_matrix(rng, r, c));
  return MatrixPolynomial::affine_from_vertices(sig, simplex, verts);
}

}  // namespace

TEST(SimplexSignature, OffsetsAndTotals) {
  SimplexSignature sig({2, 3, 1});
  EXPECT_EQ(sig.num_simplexes(), 3);
  EXPECT_EQ(sig.offset(0), 0);
  EXPECT_EQ(sig.offset(1), 2);
  EXPECT_EQ(sig.offset(2), 5);
  EXPECT_EQ(sig.total_vertices(), 6);
  EXPECT_THROW(SimplexSignature({2, 0}), std::invalid_argument);
  EXPECT_THROW(SimplexSignature::uniform(-1, 2), std::invalid_argument);
}

TEST(SimplexSignature, ZeroSimplexesHoldConstants) {
  const auto sig = SimplexSignature::uniform(0, 2);
  EXPECT_EQ(sig.total_vertices(), 0);
  Matrix v(2, 2);
  v << 1, 2, 2, 5;
  const auto p = MatrixPolynomial::constant(sig, v);
  EXPECT_EQ(p.terms().size(), 1u);
  EXPECT_TRUE(evaluate(p, SimplexPoint{}).isApprox(v));
  const auto h = homogenize(p, {});
  EXPECT_TRUE(h == p);
  EXPECT_EQ(to_string(Monomial{}, sig), "");
  EXPECT_EQ(parse_monomial("", sig), Monomial{});
}

TEST(ExponentVectors, OrderAndCount) {
  const auto e = exponent_vectors(2, 2);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0], (std::vector<int>{2, 0}));
  EXPECT_EQ(e[1], (std::vector<int>{1, 1}));
  EXPECT_EQ(e[2], (std::vector<int>{0, 2}));
  for (int V = 1; V <= 4; ++V)
    for (int d = 0; d <= 5; ++d) EXPECT_EQ(static_cast<long long>(exponent_vectors(V, d).size()), monomial_count(V, d));
  EXPECT_EQ(monomial_count(3, 4), 15);
  EXPECT_DOUBLE_EQ(multinomial({1, 1}), 2.0);
  EXPECT_DOUBLE_EQ(multinomial({2, 1, 1}), 12.0);
}

TEST(Monomial, TextRoundTrip) {
  SimplexSignature sig({2, 3});
  Monomial m{{2, 0, 1, 0, 3}};
  EXPECT_EQ(to_string(m, sig), "2,0|1,0,3");
  EXPECT_EQ(parse_monomial("2,0|1,0,3", sig), m);
  EXPECT_THROW(parse_monomial("2,0", sig), std::invalid_argument);
  EXPECT_THROW(parse_monomial("2,0|1,0", sig), std::invalid_argument);
  EXPECT_THROW(parse_monomial("2,-1|1,0,3", sig), std::invalid_argument);
  EXPECT_THROW(parse_monomial("2,x|1,0,3", sig), std::invalid_argument);
}

TEST(MatrixPolynomial, EvaluationIsAHomomorphism) {
  SplitRng rng(11);
  SimplexSignature sig({2, 3});
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_affine(rng, sig, 0, 3, 4);
    const auto b = random_affine(rng, sig, 1, 4, 2);
    const auto c = random_affine(rng, sig, 0, 3, 4);
    const auto pt = random_point(rng, sig);
    EXPECT_LT((evaluate(multiply(a, b), pt) - evaluate(a, pt) * evaluate(b, pt)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((evaluate(a + c, pt) - evaluate(a, pt) - evaluate(c, pt)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((evaluate(a - c, pt) - evaluate(a, pt) + evaluate(c, pt)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((evaluate(a.transpose(), pt) - evaluate(a, pt).transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MatrixPolynomial, AdditionHomogenizesMixedDegrees) {
  SplitRng rng(5);
  SimplexSignature sig({2});
  const auto a = random_affine(rng, sig, 0, 2, 2);
  const Matrix c = random_matrix(rng, 2, 2);
  const auto sum = a + MatrixPolynomial::constant(sig, c);
  EXPECT_EQ(sum.degrees(), std::vector<int>{1});
  for (const auto& [mono, coeff] : sum.terms()) EXPECT_EQ(mono.degree(sig, 0), 1);
  const auto pt = random_point(rng, sig);
  EXPECT_LT((evaluate(sum, pt) - evaluate(a, pt) - c).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MatrixPolynomial, HomogenizationPreservesValuesOnTheSimplex) {
  SplitRng rng(3);
  SimplexSignature sig({2, 3});
  const auto a = random_affine(rng, sig, 0, 2, 2);
  const auto b = random_affine(rng, sig, 1, 2, 2);
  const auto p = multiply(a, b);
  const auto h = homogenize(p, {3, 2});
  EXPECT_EQ(h.degrees(), (std::vector<int>{3, 2}));
  EXPECT_EQ(static_cast<long long>(h.terms().size()), monomial_count(2, 3) * monomial_count(3, 2));
  for (int r = 0; r < 25; ++r) {
    const auto pt = random_point(rng, sig);
    EXPECT_LT((evaluate(h, pt) - evaluate(p, pt)).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(homogenize(p, {0, 2}), std::invalid_argument);
  EXPECT_THROW(homogenize(p, {1}), std::invalid_argument);
}

TEST(MatrixPolynomial, HomogenizedConstantHasMultinomialWeights) {
  SimplexSignature sig({3});
  const auto h = homogenize(MatrixPolynomial::constant(sig, Matrix::Identity(1, 1)), {2});
  for (const auto& [mono, coeff] : h.terms()) EXPECT_DOUBLE_EQ(coeff(0, 0), oracle::multinomial2(mono.exponents));
}

TEST(MatrixPolynomial, CongruenceMatchesPointwiseProduct) {
  SplitRng rng(17);
  SimplexSignature sig({2, 2});
  const auto L = random_affine(rng, sig, 1, 3, 3);
  Matrix s = random_matrix(rng, 3, 3);
  s = s + s.transpose().eval();
  const auto P = random_affine(rng, sig, 0, 3, 3).symmetrized() + MatrixPolynomial::constant(sig, s);
  const auto c = congruence(P, L);
  const auto pt = random_point(rng, sig);
  const Matrix l = evaluate(L, pt);
  EXPECT_LT((evaluate(c, pt) - l.transpose() * evaluate(P, pt) * l).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MatrixPolynomial, EmbedPlacesBlock) {
  SplitRng rng(23);
  SimplexSignature sig({2});
  const auto a = random_affine(rng, sig, 0, 2, 3);
  const auto e = embed(a, 5, 6, 1, 2);
  const auto pt = random_point(rng, sig);
  const Matrix big = evaluate(e, pt);
  EXPECT_LT((big.block(1, 2, 2, 3) - evaluate(a, pt)).cwiseAbs().maxCoeff(), 1e-14);
  Matrix rest = big;
  rest.block(1, 2, 2, 3).setZero();
  EXPECT_EQ(rest.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(embed(a, 2, 3, 1, 0), std::invalid_argument);
}

TEST(MatrixPolynomial, RemapCollapsesSimplexes) {
  SplitRng rng(29);
  SimplexSignature two({2, 2});
  SimplexSignature one({2});
  const auto p = multiply(random_affine(rng, two, 0, 2, 2), random_affine(rng, two, 1, 2, 2));
  const auto r = remap(p, one, {0, 0});
  EXPECT_EQ(r.degrees(), std::vector<int>{2});
  const Vector a = rng.simplex(2);
  SimplexPoint both{{a, a}};
  SimplexPoint single{{a}};
  EXPECT_LT((evaluate(r, single) - evaluate(p, both)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(remap(p, SimplexSignature({3}), {0, 0}), std::invalid_argument);
}

TEST(MatrixPolynomial, ShapeAndSignatureErrors) {
  SplitRng rng(31);
  SimplexSignature sig({2});
  const auto a = random_affine(rng, sig, 0, 2, 3);
  EXPECT_THROW(multiply(a, a), std::invalid_argument);
  EXPECT_THROW(a + random_affine(rng, sig, 0, 3, 3), std::invalid_argument);
  EXPECT_THROW(a + random_affine(rng, SimplexSignature({3}), 0, 2, 3), std::invalid_argument);
  EXPECT_THROW(coefficient_lmis(a), std::invalid_argument);
  EXPECT_THROW(evaluate(a, SimplexPoint{{Vector::Ones(3) / 3}}), std::invalid_argument);
  EXPECT_THROW(MatrixPolynomial::affine_from_vertices(sig, 1, {Matrix::Zero(1, 1), Matrix::Zero(1, 1)}), std::invalid_argument);
}

TEST(MatrixPolynomial, CoefficientsAreSymmetrized) {
  SimplexSignature sig({2});
  Matrix v(2, 2);
  v << 1, 2, 0, 1;
  const auto c = coefficient_lmis(MatrixPolynomial::affine_from_vertices(sig, 0, {v, v}));
  ASSERT_EQ(c.size(), 2u);
  for (const auto& [mono, m] : c) EXPECT_TRUE(m.isApprox(m.transpose()));
  EXPECT_DOUBLE_EQ(c[0].second(0, 1), 1.0);
}
