#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bpqm/kernels.hpp"

using namespace bpqm;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, bool nonneg = false) {
  std::uniform_real_distribution<double> u(nonneg ? 0.0 : -1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

bool close(double a, double b, double tol = 1e-12) {
  return std::fabs(a - b) <= tol * (1.0 + std::fabs(a) + std::fabs(b));
}

}  // namespace

TEST_CASE("scalar and simd backends agree") {
  const auto& s = kern::scalar_ops();
  const auto& active = kern::ops();
  if (std::string(active.name) == "scalar") {
    MESSAGE("no SIMD backend on this host; scalar only");
    return;
  }
  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 33u, 100u, 1000u}) {
    const auto x = random_vec(rng, n);
    const auto y = random_vec(rng, n);
    const auto px = random_vec(rng, n, true);

    CHECK(close(s.sum(x.data(), n), active.sum(x.data(), n)));
    CHECK(close(s.sum_sqrt(px.data(), n), active.sum_sqrt(px.data(), n)));
    CHECK(close(s.dot(x.data(), y.data(), n), active.dot(x.data(), y.data(), n)));
    CHECK(close(s.l1_dist(x.data(), y.data(), n), active.l1_dist(x.data(), y.data(), n)));

    std::vector<double> a1(n), a2(n);
    s.sqrt_vec(px.data(), a1.data(), n);
    active.sqrt_vec(px.data(), a2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(a1[i], a2[i]));

    a1 = x;
    a2 = x;
    s.scale(a1.data(), n, 1.7);
    active.scale(a2.data(), n, 1.7);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(a1[i], a2[i]));

    a1 = x;
    a2 = x;
    s.axpy(a1.data(), y.data(), n, -0.3);
    active.axpy(a2.data(), y.data(), n, -0.3);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(a1[i], a2[i]));

    std::vector<double> r1 = x, r1b = y, r2 = x, r2b = y;
    s.rot(r1.data(), r1b.data(), n, 0.8, 0.6);
    active.rot(r2.data(), r2b.data(), n, 0.8, 0.6);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(close(r1[i], r2[i]));
      CHECK(close(r1b[i], r2b[i]));
    }

    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(rng() % n);
    std::vector<double> g1(n), g2(n);
    s.gather(x.data(), idx.data(), g1.data(), n);
    active.gather(x.data(), idx.data(), g2.data(), n);
    CHECK(g1 == g2);
  }
  // outer product
  for (auto [na, nb] : {std::pair<std::size_t, std::size_t>{2, 2}, {4, 8}, {3, 5}, {16, 32}}) {
    const auto a = random_vec(rng, na);
    const auto b = random_vec(rng, nb);
    std::vector<double> o1(na * nb), o2(na * nb);
    s.outer(a.data(), na, b.data(), nb, o1.data());
    active.outer(a.data(), na, b.data(), nb, o2.data());
    for (std::size_t i = 0; i < o1.size(); ++i) CHECK(close(o1[i], o2[i]));
  }
  // fwht
  for (std::size_t n : {1u, 2u, 4u, 8u, 16u, 64u, 256u}) {
    auto x = random_vec(rng, n);
    auto x2 = x;
    s.fwht(x.data(), n);
    active.fwht(x2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(x[i], x2[i]));
  }
}

TEST_CASE("fwht matches the direct sign-sum definition") {
  std::mt19937_64 rng(11);
  for (int bits = 0; bits <= 6; ++bits) {
    const std::size_t n = std::size_t{1} << bits;
    const auto x = random_vec(rng, n);
    auto w = x;
    kern::fwht(w.data(), n);
    for (std::size_t u = 0; u < n; ++u) {
      double acc = 0;
      for (std::size_t z = 0; z < n; ++z)
        acc += (std::popcount(u & z) & 1) ? -x[z] : x[z];
      CHECK(close(w[u], acc, 1e-11));
    }
  }
}

TEST_CASE("backend selection") {
  CHECK(kern::select_backend("scalar"));
  CHECK(std::string(kern::ops().name) == "scalar");
  kern::select_backend("avx2");  // may fail on non-x86; either way ops() stays valid
  CHECK(kern::ops().sum != nullptr);
}
