#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sparsescale/kernels/kernels.hpp"

using namespace sparsescale::kernels;

namespace {

struct Buffers {
  std::vector<double> a, b, w, m, v;
  std::vector<std::uint8_t> mask;
};

Buffers random_buffers(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::bernoulli_distribution keep(0.6);
  Buffers out;
  for (std::size_t i = 0; i < n; ++i) {
    out.a.push_back(nd(rng));
    out.b.push_back(nd(rng));
    out.w.push_back(nd(rng));
    out.m.push_back(0.1 * nd(rng));
    out.v.push_back(std::fabs(0.1 * nd(rng)));
    out.mask.push_back(keep(rng) ? 1 : 0);
  }
  return out;
}

void check_close(const std::vector<double>& x, const std::vector<double>& y, double tol) {
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(std::fabs(x[i] - y[i]) <= tol * (1.0 + std::fabs(y[i])));
}

}  // namespace

TEST_CASE("scalar table is always available and first") {
  const auto tables = available_kernels();
  REQUIRE(!tables.empty());
  CHECK(tables.front()->isa == Isa::kScalar);
  CHECK(kernels_for(Isa::kScalar) == &scalar_kernels());
  const KernelTable& act = active_kernels();
  CHECK(act.dot != nullptr);
  MESSAGE("active kernel table: " << to_string(act.isa));
}

TEST_CASE("scalar kernels match hand-computed values") {
  const KernelTable& k = scalar_kernels();
  const double a[3] = {1, 2, 3}, b[3] = {4, -5, 6};
  CHECK(k.dot(a, b, 3) == doctest::Approx(12.0));
  double y[3] = {1, 1, 1};
  k.axpy(2.0, a, y, 3);
  CHECK(y[2] == doctest::Approx(7.0));
  double w[3] = {1, 2, 3};
  const double g[3] = {10, 10, 10};
  const std::uint8_t mask[3] = {1, 0, 1};
  k.masked_sgd(w, g, mask, 0.1, 3);
  CHECK(w[0] == doctest::Approx(0.0));
  CHECK(w[1] == 2.0);
  CHECK(k.masked_abs_sum(w, mask, 3) == doctest::Approx(2.0));
  k.apply_mask(w, mask, 3);
  CHECK(w[1] == 0.0);
  CHECK(k.masked_abs_sum(w, mask, 3) == 0.0);
}

TEST_CASE("first Adam step moves each active weight by about lr") {
  const KernelTable& k = scalar_kernels();
  double w[2] = {0.0, 5.0}, m[2] = {0, 3}, v[2] = {0, 3};
  const double g[2] = {0.3, 0.7};
  const std::uint8_t mask[2] = {1, 0};
  AdamStep st;
  st.lr = 0.01;
  st.bias1 = 1.0 - st.beta1;
  st.bias2 = 1.0 - st.beta2;
  k.masked_adam(w, m, v, g, mask, st, 2);
  CHECK(w[0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(w[1] == 5.0);
  CHECK(m[1] == 0.0);
  CHECK(v[1] == 0.0);
}

TEST_CASE("every SIMD table agrees with the scalar reference") {
  std::mt19937_64 rng(1234);
  const KernelTable& ref = scalar_kernels();
  for (const KernelTable* t : available_kernels()) {
    CAPTURE(to_string(t->isa));
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 33u, 100u, 1001u}) {
      CAPTURE(n);
      const Buffers buf = random_buffers(n, rng);

      CHECK(t->dot(buf.a.data(), buf.b.data(), n) ==
            doctest::Approx(ref.dot(buf.a.data(), buf.b.data(), n)).epsilon(1e-12).scale(1.0));

      auto y1 = buf.w, y2 = buf.w;
      t->axpy(0.37, buf.a.data(), y1.data(), n);
      ref.axpy(0.37, buf.a.data(), y2.data(), n);
      check_close(y1, y2, 1e-14);

      auto w1 = buf.w, w2 = buf.w;
      t->masked_sgd(w1.data(), buf.a.data(), buf.mask.data(), 0.05, n);
      ref.masked_sgd(w2.data(), buf.a.data(), buf.mask.data(), 0.05, n);
      check_close(w1, w2, 1e-14);
      for (std::size_t i = 0; i < n; ++i)
        if (!buf.mask[i]) CHECK(w1[i] == buf.w[i]);

      AdamStep st;
      st.lr = 3e-3;
      st.bias1 = 1.0 - std::pow(st.beta1, 5);
      st.bias2 = 1.0 - std::pow(st.beta2, 5);
      auto aw1 = buf.w, am1 = buf.m, av1 = buf.v;
      auto aw2 = buf.w, am2 = buf.m, av2 = buf.v;
      t->masked_adam(aw1.data(), am1.data(), av1.data(), buf.a.data(), buf.mask.data(), st, n);
      ref.masked_adam(aw2.data(), am2.data(), av2.data(), buf.a.data(), buf.mask.data(), st, n);
      check_close(aw1, aw2, 1e-12);
      check_close(am1, am2, 1e-13);
      check_close(av1, av2, 1e-13);

      auto mw1 = buf.w, mw2 = buf.w;
      t->apply_mask(mw1.data(), buf.mask.data(), n);
      ref.apply_mask(mw2.data(), buf.mask.data(), n);
      CHECK(mw1 == mw2);

      CHECK(t->masked_abs_sum(buf.w.data(), buf.mask.data(), n) ==
            doctest::Approx(ref.masked_abs_sum(buf.w.data(), buf.mask.data(), n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("gemm helpers match a naive triple loop on every table") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd(0.0, 1.0);
  const std::size_t m = 5, n = 7, k = 9;
  std::vector<double> a(m * k), b(n * k), at(m * n), bt(m * k), c0(n * k);
  for (auto* vec : {&a, &b, &at, &bt, &c0})
    for (double& x : *vec) x = nd(rng);

  for (const KernelTable* t : available_kernels()) {
    CAPTURE(to_string(t->isa));
    // a * b^T
    std::vector<double> c(m * n, 1.0);
    gemm_abt(*t, a.data(), b.data(), c.data(), m, n, k);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
        CHECK(c[i * n + j] == doctest::Approx(s).epsilon(1e-12));
      }
    std::vector<double> cacc(m * n, 1.0);
    gemm_abt(*t, a.data(), b.data(), cacc.data(), m, n, k, true);
    for (std::size_t i = 0; i < m * n; ++i) CHECK(cacc[i] == doctest::Approx(c[i] + 1.0));

    // c0 += at^T * bt, at is m x n, bt is m x k
    auto c1 = c0;
    gemm_atb_acc(*t, at.data(), bt.data(), c1.data(), m, n, k);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        double s = c0[i * k + j];
        for (std::size_t r = 0; r < m; ++r) s += at[r * n + i] * bt[r * k + j];
        CHECK(c1[i * k + j] == doctest::Approx(s).epsilon(1e-12));
      }

    // at (m x n) * b' (n x k) using c0 as the n x k right factor
    std::vector<double> c2(m * k, 5.0);
    gemm_ab(*t, at.data(), c0.data(), c2.data(), m, n, k);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p) s += at[i * n + p] * c0[p * k + j];
        CHECK(c2[i * k + j] == doctest::Approx(s).epsilon(1e-12));
      }
  }
}
