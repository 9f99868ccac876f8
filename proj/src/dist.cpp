#include "bpqm/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bpqm/kernels.hpp"

namespace bpqm::dist {

Distribution Distribution::validated(int m, std::vector<double> probs) {
  if (m < 0 || m > 30) fail(Errc::TooLarge, "distribution bit count out of range");
  if (probs.size() != (std::size_t{1} << m)) fail(Errc::BadInput, "distribution entry count != 2^m");
  for (double v : probs)
    if (!(v >= 0.0)) fail(Errc::BadInput, "distribution entries must be non-negative");
  const double s = kern::sum(probs.data(), probs.size());
  if (std::fabs(s - 1.0) > 1e-9) fail(Errc::BadInput, "distribution does not sum to 1");
  Distribution d;
  d.m = m;
  d.probs = std::move(probs);
  return d;
}

Distribution Distribution::uniform(int m) {
  Distribution d;
  d.m = m;
  d.probs.assign(std::size_t{1} << m, std::ldexp(1.0, -m));
  return d;
}

Distribution Distribution::deterministic(int m, std::uint64_t value) {
  Distribution d;
  d.m = m;
  d.probs.assign(std::size_t{1} << m, 0.0);
  d.probs.at(value) = 1.0;
  return d;
}

Distribution Distribution::bspsc(double p) {
  if (!(p >= 0.0 && p <= 1.0)) fail(Errc::OutOfRange, "channel parameter must be in [0,1]");
  Distribution d;
  d.m = 1;
  d.probs = {1.0 - p, p};
  return d;
}

Distribution product(const Distribution& d1, const Distribution& d2) {
  Distribution out;
  out.m = d1.m + d2.m;
  out.probs.resize(d1.size() * d2.size());
  kern::outer(d1.probs.data(), d1.size(), d2.probs.data(), d2.size(), out.probs.data());
  return out;
}

std::vector<std::uint32_t> relabel_table(const gf2::BitMatrix& m) {
  if (m.rows() != m.cols()) fail(Errc::BadInput, "relabel requires a square matrix");
  const int n = m.rows();
  const gf2::BitMatrix minv = invert(m);  // throws Singular
  std::vector<std::uint32_t> idx(std::size_t{1} << n);
  for (std::uint64_t z = 0; z < idx.size(); ++z) {
    const gf2::BitVector v = minv.mul(gf2::BitVector::from_index(z, static_cast<std::size_t>(n)));
    idx[z] = static_cast<std::uint32_t>(v.to_index());
  }
  return idx;
}

Distribution relabel(const Distribution& d, const gf2::BitMatrix& m) {
  if (m.rows() != d.m) fail(Errc::WidthMismatch, "relabel matrix size != distribution bits");
  const std::vector<std::uint32_t> idx = relabel_table(m);
  Distribution out;
  out.m = d.m;
  out.probs.resize(d.size());
  kern::gather(d.probs.data(), idx.data(), out.probs.data(), d.size());
  return out;
}

std::vector<Conditional> conditional_split(const Distribution& q, int l) {
  if (l < 0 || l > q.m) fail(Errc::BadInput, "conditional_split: bad prefix width");
  const int r = q.m - l;
  const std::size_t ns = std::size_t{1} << r;
  const std::size_t ny = std::size_t{1} << l;
  std::vector<Conditional> out;
  for (std::uint64_t s = 0; s < ns; ++s) {
    double ps = 0.0;
    for (std::uint64_t y = 0; y < ny; ++y) ps += q.probs[(y << r) | s];
    if (ps == 0.0) continue;
    Conditional c;
    c.p = ps;
    c.suffix = s;
    c.d.m = l;
    c.d.probs.resize(ny);
    const double inv = 1.0 / ps;
    for (std::uint64_t y = 0; y < ny; ++y) c.d.probs[y] = q.probs[(y << r) | s] * inv;
    out.push_back(std::move(c));
  }
  return out;
}

Distribution marginalize_low(const Distribution& d, int drop) {
  if (drop < 0 || drop > d.m) fail(Errc::BadInput, "marginalize_low: bad bit count");
  const std::size_t block = std::size_t{1} << drop;
  Distribution out;
  out.m = d.m - drop;
  out.probs.resize(std::size_t{1} << out.m);
  for (std::size_t i = 0; i < out.probs.size(); ++i)
    out.probs[i] = kern::sum(d.probs.data() + i * block, block);
  return out;
}

double renyi_half(const Distribution& d) {
  const double s = kern::sum_sqrt(d.probs.data(), d.size());
  return 2.0 * std::log2(s);
}

Distribution conjugate_outcome_dist(const Distribution& d, const gf2::BitVector& x) {
  if (static_cast<int>(x.size()) != d.m) fail(Errc::WidthMismatch, "input width != distribution bits");
  std::vector<double> w(d.size());
  kern::sqrt_vec(d.probs.data(), w.data(), d.size());
  kern::fwht(w.data(), w.size());
  const std::uint64_t xi = x.to_index();
  Distribution out;
  out.m = d.m;
  out.probs.resize(d.size());
  const double norm = std::ldexp(1.0, -d.m);
  for (std::uint64_t y = 0; y < d.size(); ++y) {
    const double a = w[xi ^ y];
    out.probs[y] = norm * a * a;
  }
  return out;
}

Distribution round_to_grid(const Distribution& d, const GridParams& g) {
  const int b = g.bits;
  if (b < 1 || b > 64) fail(Errc::OutOfRange, "grid bits must be within 1..64");
  using U = unsigned __int128;
  const U one = U{1} << b;
  const std::size_t n = d.size();
  std::vector<U> units(n);
  std::vector<double> frac(n);
  U total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double scaled = std::ldexp(static_cast<long double>(d.probs[i]), b);
    long double fl = std::floor(scaled);
    units[i] = static_cast<U>(fl);
    frac[i] = static_cast<double>(scaled - fl);
    total += units[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (total < one) {
    std::uint64_t need = static_cast<std::uint64_t>(one - total);
    // largest remainders first, lowest index on ties
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c) { return frac[a] > frac[c]; });
    for (std::uint64_t i = 0; i < need; ++i) units[order[i % n]] += 1;
  } else if (total > one) {
    // can only happen when the input oversums within its 1e-9 tolerance
    std::uint64_t excess = static_cast<std::uint64_t>(total - one);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c) { return frac[a] < frac[c]; });
    std::uint64_t removed = 0;
    for (std::size_t pass = 0; removed < excess; ++pass) {
      for (std::size_t i = 0; i < n && removed < excess; ++i) {
        if (units[order[i]] > 0) {
          units[order[i]] -= 1;
          ++removed;
        }
      }
      if (pass > 64) fail(Errc::BadInput, "grid rounding failed to balance");
    }
  }
  Distribution out;
  out.m = d.m;
  out.probs.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.probs[i] = static_cast<double>(std::ldexp(static_cast<long double>(units[i]), -b));
  return out;
}

}  // namespace bpqm::dist
