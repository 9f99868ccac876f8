#include "bpqm/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "bpqm/kernels.hpp"

namespace bpqm::oracle {

namespace {

int parity64(std::uint64_t v) { return std::popcount(v) & 1; }

std::vector<std::uint64_t> codeword_masks(const BitMatrix& g) {
  const int k = g.rows();
  std::vector<std::uint64_t> cw(std::size_t{1} << k, 0);
  for (std::uint64_t u = 0; u < cw.size(); ++u) {
    std::uint64_t acc = 0;
    for (int r = 0; r < k; ++r)
      if ((u >> r) & 1u) acc ^= g.row_mask(r);
    cw[u] = acc;
  }
  return cw;
}

// index-encoded bit string (bit 1 = MSB) from a column-mask codeword
std::uint64_t mask_to_index(std::uint64_t mask, int n) {
  std::uint64_t v = 0;
  for (int j = 0; j < n; ++j)
    if ((mask >> j) & 1u) v |= std::uint64_t{1} << (n - 1 - j);
  return v;
}

Distribution product_channel(const std::vector<double>& p) {
  Distribution d = Distribution::bspsc(p.at(0));
  for (std::size_t i = 1; i < p.size(); ++i) d = dist::product(d, Distribution::bspsc(p[i]));
  return d;
}

}  // namespace

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) fail(Errc::BadInput, "matmul shape mismatch");
  Mat c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    double* crow = &c.a[static_cast<std::size_t>(i) * c.cols];
    const double* arow = &a.a[static_cast<std::size_t>(i) * a.cols];
    for (int k = 0; k < a.cols; ++k) {
      const double v = arow[k];
      if (v == 0.0) continue;
      kern::axpy(crow, &b.a[static_cast<std::size_t>(k) * b.cols], static_cast<std::size_t>(b.cols), v);
    }
  }
  return c;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

double max_abs_diff(const Mat& a, const Mat& b) {
  if (a.rows != b.rows || a.cols != b.cols) fail(Errc::BadInput, "shape mismatch");
  double m = 0;
  for (std::size_t i = 0; i < a.a.size(); ++i) m = std::max(m, std::fabs(a.a[i] - b.a[i]));
  return m;
}

Vec spsc_state(const Distribution& p, const BitVector& x) {
  if (static_cast<int>(x.size()) != p.m) fail(Errc::WidthMismatch, "input width != distribution bits");
  const std::uint64_t xi = x.to_index();
  Vec psi(p.size());
  kern::sqrt_vec(p.probs.data(), psi.data(), p.size());
  for (std::uint64_t z = 0; z < p.size(); ++z)
    if (parity64(xi & z)) psi[z] = -psi[z];
  return psi;
}

double spsc_overlap(const Distribution& p, const BitVector& x, const BitVector& y) {
  const std::uint64_t d = x.to_index() ^ y.to_index();
  double acc = 0;
  for (std::uint64_t z = 0; z < p.size(); ++z) acc += parity64(d & z) ? -p.probs[z] : p.probs[z];
  return acc;
}

Mat channel_output(const mpg::SdtInstance& inst, const BitVector& x) {
  inst.check();
  if (inst.n > 12) fail(Errc::TooLarge, "dense channel output guarded at n <= 12");
  const std::size_t dim = std::size_t{1} << inst.n;
  Mat w(static_cast<int>(dim), static_cast<int>(dim));
  const double scale = std::ldexp(1.0, -(inst.k - inst.l));
  for (std::uint64_t r = 0; r < (std::uint64_t{1} << (inst.k - inst.l)); ++r) {
    BitVector xr = x;
    for (int i = inst.k - inst.l - 1; i >= 0; --i)
      xr.bits.push_back(static_cast<std::uint8_t>((r >> i) & 1u));
    const BitVector cw = inst.g.mul_left(xr);
    const Vec psi = spsc_state(inst.p, cw);
    for (std::size_t i = 0; i < dim; ++i)
      kern::axpy(&w.a[i * dim], psi.data(), dim, scale * psi[i]);
  }
  return w;
}

Mat pno_matrix(const mpg::SdtInstance& inst) {
  inst.check();
  if (inst.n > 12) fail(Errc::TooLarge, "dense PNO guarded at n <= 12");
  const int n = inst.n, k = inst.k, l = inst.l;
  const auto [m, kmat] = gf2::complete_to_invertible(inst.g);
  (void)kmat;
  const Distribution q = dist::relabel(inst.p, m);  // P_{Y,S,A}

  const std::size_t dim = std::size_t{1} << n;
  const std::size_t adim = std::size_t{1} << (n - k);
  const std::size_t ysdim = std::size_t{1} << k;

  // Householder blocks V(y,s): map |xi_{y,s}> to e_0. Zero-probability
  // conditionals keep the identity.
  std::vector<Vec> reflectors(ysdim);  // empty vector = identity block
  for (std::uint64_t ys = 0; ys < ysdim; ++ys) {
    double mass = 0;
    for (std::uint64_t a = 0; a < adim; ++a) mass += q.probs[(ys << (n - k)) | a];
    if (mass <= 0) continue;
    Vec xi(adim);
    for (std::uint64_t a = 0; a < adim; ++a) xi[a] = std::sqrt(q.probs[(ys << (n - k)) | a] / mass);
    xi[0] -= 1.0;  // v = xi - e0
    const double nrm2 = kern::dot(xi.data(), xi.data(), adim);
    if (std::sqrt(nrm2) < 1e-14) continue;  // xi was already e0
    kern::scale(xi.data(), adim, std::sqrt(2.0 / nrm2));
    reflectors[ys] = std::move(xi);  // V = I - v v^T with |v| = sqrt(2)
  }

  // column of U at input z: U2 applied to e_{Mz}
  Mat u(static_cast<int>(dim), static_cast<int>(dim));
  for (std::uint64_t z = 0; z < dim; ++z) {
    const gf2::BitVector mz = m.mul(BitVector::from_index(z, static_cast<std::size_t>(n)));
    const std::uint64_t w = mz.to_index();
    const std::uint64_t ys = w >> (n - k);
    const std::uint64_t a = w & (adim - 1);
    const Vec& v = reflectors[ys];
    if (v.empty()) {
      u.at(static_cast<int>(w), static_cast<int>(z)) = 1.0;
    } else {
      for (std::uint64_t ap = 0; ap < adim; ++ap) {
        const double entry = (ap == a ? 1.0 : 0.0) - v[ap] * v[a];
        if (entry != 0.0) u.at(static_cast<int>((ys << (n - k)) | ap), static_cast<int>(z)) = entry;
      }
    }
  }
  (void)l;
  return u;
}

double verify_node_lemma(const mpg::SdtInstance& inst) {
  inst.check();
  if (inst.n > 10) fail(Errc::TooLarge, "node lemma check guarded at n <= 10");
  const int n = inst.n, k = inst.k, l = inst.l;
  const Mat u = pno_matrix(inst);
  const Mat ut = transpose(u);

  const auto [m, kmat] = gf2::complete_to_invertible(inst.g);
  (void)kmat;
  const Distribution q = dist::relabel(inst.p, m);
  const Distribution r = dist::marginalize_low(q, n - k);
  const auto conds = dist::conditional_split(r, l);

  const std::size_t dim = std::size_t{1} << n;
  double worst = 0;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << l); ++x) {
    const BitVector xv = BitVector::from_index(x, static_cast<std::size_t>(l));
    const Mat w = channel_output(inst, xv);
    const Mat lhs = matmul(matmul(u, w), ut);

    Mat rhs(static_cast<int>(dim), static_cast<int>(dim));
    for (const auto& c : conds) {
      const Vec phi = spsc_state(c.d, xv);
      // embed at block (y||s||a) with s = c.suffix, a = 0
      for (std::uint64_t y1 = 0; y1 < phi.size(); ++y1)
        for (std::uint64_t y2 = 0; y2 < phi.size(); ++y2) {
          const std::uint64_t r1 = ((y1 << (k - l) | c.suffix) << (n - k));
          const std::uint64_t r2 = ((y2 << (k - l) | c.suffix) << (n - k));
          rhs.at(static_cast<int>(r1), static_cast<int>(r2)) += c.p * phi[y1] * phi[y2];
        }
    }
    worst = std::max(worst, max_abs_diff(lhs, rhs));
  }
  return worst;
}

SymEig symmetric_eigen(Mat a, double tol) {
  if (a.rows != a.cols) fail(Errc::BadInput, "symmetric_eigen requires a square matrix");
  const int n = a.rows;
  Mat w = Mat::identity(n);  // rows accumulate the eigenvectors
  auto off_norm = [&]() {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += a.at(i, j) * a.at(i, j);
    return std::sqrt(2.0 * s);
  };
  for (int sweep = 0; sweep < 100 && off_norm() > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J on rows/cols p and q
        for (int i = 0; i < n; ++i) {
          const double aip = a.at(i, p), aiq = a.at(i, q);
          a.at(i, p) = c * aip - s * aiq;
          a.at(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = a.at(p, i), aqi = a.at(q, i);
          a.at(p, i) = c * api - s * aqi;
          a.at(q, i) = s * api + c * aqi;
        }
        kern::rot(&w.a[static_cast<std::size_t>(p) * n], &w.a[static_cast<std::size_t>(q) * n],
                  static_cast<std::size_t>(n), c, s);
      }
    }
  }
  SymEig out;
  out.eigenvalues.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.eigenvalues[static_cast<std::size_t>(i)] = a.at(i, i);
  out.eigenvectors_rows = std::move(w);
  return out;
}

double helstrom(const Mat& rho0, const Mat& rho1) {
  if (rho0.rows != rho1.rows || rho0.cols != rho1.cols) fail(Errc::BadInput, "dimension mismatch");
  Mat diff = rho0;
  for (std::size_t i = 0; i < diff.a.size(); ++i) diff.a[i] -= rho1.a[i];
  const SymEig eig = symmetric_eigen(std::move(diff), 1e-12);
  double tn = 0;
  for (double v : eig.eigenvalues) tn += std::fabs(v);
  return 0.5 + 0.25 * tn;
}

Mat gram_matrix(const BitMatrix& g, const std::vector<double>& p) {
  const int k = g.rows(), n = g.cols();
  if (static_cast<int>(p.size()) != n) fail(Errc::WidthMismatch, "channel parameter count != n");
  if (k > 10) fail(Errc::TooLarge, "Gram matrix guarded at k <= 10");
  const auto cw = codeword_masks(g);
  const std::size_t dim = cw.size();
  Mat gram(static_cast<int>(dim), static_cast<int>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    gram.at(static_cast<int>(i), static_cast<int>(i)) = 1.0;
    for (std::size_t j = i + 1; j < dim; ++j) {
      std::uint64_t diff = cw[i] ^ cw[j];
      double v = 1.0;
      while (diff) {
        v *= 1.0 - 2.0 * p[static_cast<std::size_t>(std::countr_zero(diff))];
        diff &= diff - 1;
      }
      gram.at(static_cast<int>(i), static_cast<int>(j)) = v;
      gram.at(static_cast<int>(j), static_cast<int>(i)) = v;
    }
  }
  return gram;
}

namespace {

// G^{1/2} (and a singularity check) from the eigendecomposition.
Mat gram_sqrt(const Mat& gram) {
  const SymEig eig = symmetric_eigen(gram, 1e-13);
  Mat s(gram.rows, gram.cols);
  for (std::size_t i = 0; i < eig.eigenvalues.size(); ++i) {
    if (eig.eigenvalues[i] < 1e-12) fail(Errc::SingularGram, "codeword states are linearly dependent");
    const double root = std::sqrt(eig.eigenvalues[i]);
    const double* v = &eig.eigenvectors_rows.a[i * static_cast<std::size_t>(gram.cols)];
    for (int r = 0; r < gram.rows; ++r)
      kern::axpy(&s.a[static_cast<std::size_t>(r) * s.cols], v, static_cast<std::size_t>(s.cols), root * v[r]);
  }
  return s;
}

// projector onto the positive eigenspace
Mat positive_projector(const Mat& a) {
  const SymEig eig = symmetric_eigen(a, 1e-13);
  double scale = 0;
  for (double v : eig.eigenvalues) scale = std::max(scale, std::fabs(v));
  Mat proj(a.rows, a.cols);
  for (std::size_t i = 0; i < eig.eigenvalues.size(); ++i) {
    if (eig.eigenvalues[i] <= 1e-12 * std::max(1.0, scale)) continue;
    const double* v = &eig.eigenvectors_rows.a[i * static_cast<std::size_t>(a.cols)];
    for (int r = 0; r < a.rows; ++r)
      kern::axpy(&proj.a[static_cast<std::size_t>(r) * proj.cols], v, static_cast<std::size_t>(proj.cols), v[r]);
  }
  return proj;
}

}  // namespace

double pgm_block_success(const Mat& gram) {
  const Mat s = gram_sqrt(gram);
  double acc = 0;
  for (int i = 0; i < s.rows; ++i) acc += s.at(i, i) * s.at(i, i);
  return acc / static_cast<double>(s.rows);
}

double sequential_block_success(const BitMatrix& g, const std::vector<double>& p) {
  const int k = g.rows(), n = g.cols();
  if (n > 10 || k > 8) fail(Errc::TooLarge, "sequential decoding guarded at n <= 10, k <= 8");
  const auto cw = codeword_masks(g);
  const std::size_t dim = cw.size();
  const Mat gram = gram_matrix(g, p);
  const Mat ghalf = gram_sqrt(gram);

  // k positions whose codeword bits are linearly independent
  std::vector<int> positions;
  {
    BitMatrix cols(0, k);
    for (int j = 0; j < n && static_cast<int>(positions.size()) < k; ++j) {
      BitMatrix row(1, k);
      for (int r = 0; r < k; ++r) row.set(0, r, g.get(r, j));
      BitMatrix cand = cols.vstack(row);
      if (gf2::rank(cand) == cand.rows()) {
        cols = cand;
        positions.push_back(j);
      }
    }
    if (static_cast<int>(positions.size()) != k) fail(Errc::NotFullRank, "generator matrix not full rank");
  }

  // bit projectors Pi_i = {rho0 - rho1 > 0} in the span basis
  std::vector<Mat> projectors;
  projectors.reserve(positions.size());
  for (int pos : positions) {
    Mat delta(static_cast<int>(dim), static_cast<int>(dim));
    // G^{1/2} D G^{1/2} with D = diag(+1 for x_pos = 0, -1 otherwise)
    for (std::size_t x = 0; x < dim; ++x) {
      const double sign = ((cw[x] >> pos) & 1u) ? -1.0 : 1.0;
      for (std::size_t r = 0; r < dim; ++r)
        kern::axpy(&delta.a[r * dim], &ghalf.a[x * dim], dim, sign * ghalf.at(static_cast<int>(r), static_cast<int>(x)));
    }
    projectors.push_back(positive_projector(delta));
  }

  // success = 2^{-k} sum_x || Pi^{x_k} ... Pi^{x_1} psi_x ||^2, psi_x = G^{1/2} e_x
  double acc = 0;
  Vec v(dim), w(dim);
  for (std::size_t x = 0; x < dim; ++x) {
    for (std::size_t r = 0; r < dim; ++r) v[r] = ghalf.at(static_cast<int>(r), static_cast<int>(x));
    for (std::size_t b = 0; b < positions.size(); ++b) {
      const Mat& proj = projectors[b];
      const bool bit = (cw[x] >> positions[b]) & 1u;
      for (std::size_t r = 0; r < dim; ++r) {
        const double pv = kern::dot(&proj.a[r * dim], v.data(), dim);
        w[r] = bit ? v[r] - pv : pv;  // Pi or (I - Pi)
      }
      std::swap(v, w);
    }
    acc += kern::dot(v.data(), v.data(), dim);
  }
  return acc / static_cast<double>(dim);
}

double helstrom_bit_success(const BitMatrix& g, const std::vector<double>& p, int bit) {
  const int k = g.rows(), n = g.cols();
  if (bit < 1 || bit > n) fail(Errc::OutOfRange, "bit index out of range");
  const auto cw = codeword_masks(g);
  const std::size_t dim = cw.size();
  bool seen1 = false;
  for (std::uint64_t c : cw) seen1 = seen1 || ((c >> (bit - 1)) & 1u);
  if (!seen1) fail(Errc::BitIdenticallyZero, "codeword bit is constant zero");
  const Mat ghalf = gram_sqrt(gram_matrix(g, p));
  Mat delta(static_cast<int>(dim), static_cast<int>(dim));
  for (std::size_t x = 0; x < dim; ++x) {
    const double sign = ((cw[x] >> (bit - 1)) & 1u) ? -1.0 : 1.0;
    for (std::size_t r = 0; r < dim; ++r)
      kern::axpy(&delta.a[r * dim], &ghalf.a[x * dim], dim, sign * ghalf.at(static_cast<int>(r), static_cast<int>(x)));
  }
  const SymEig eig = symmetric_eigen(std::move(delta), 1e-13);
  double tn = 0;
  for (double v : eig.eigenvalues) tn += std::fabs(v);
  // delta = G^{1/2} D G^{1/2} equals 2^{k-1} (rho0 - rho1) inside the span
  (void)k;
  return 0.5 + 0.25 * tn / static_cast<double>(dim / 2);
}

double helstrom_bit_success_dense(const BitMatrix& g, const std::vector<double>& p, int bit) {
  const int k = g.rows(), n = g.cols();
  if (n > 10) fail(Errc::TooLarge, "dense bit Helstrom guarded at n <= 10");
  if (bit < 1 || bit > n) fail(Errc::OutOfRange, "bit index out of range");
  const auto cw = codeword_masks(g);
  const Distribution pc = product_channel(p);
  const std::size_t dim = std::size_t{1} << n;
  Mat rho0(static_cast<int>(dim), static_cast<int>(dim)), rho1(static_cast<int>(dim), static_cast<int>(dim));
  const double scale = std::ldexp(1.0, -(k - 1));
  bool any1 = false;
  for (std::uint64_t u = 0; u < cw.size(); ++u) {
    const BitVector x = BitVector::from_index(mask_to_index(cw[u], n), static_cast<std::size_t>(n));
    const Vec psi = spsc_state(pc, x);
    Mat& target = ((cw[u] >> (bit - 1)) & 1u) ? (any1 = true, rho1) : rho0;
    for (std::size_t i = 0; i < dim; ++i) kern::axpy(&target.a[i * dim], psi.data(), dim, scale * psi[i]);
  }
  if (!any1) fail(Errc::BitIdenticallyZero, "codeword bit is constant zero");
  return helstrom(rho0, rho1);
}

void apply_on_qubits(Vec& state, int n, const Mat& u, const std::vector<int>& qubits) {
  const int q = static_cast<int>(qubits.size());
  if (u.rows != (1 << q) || u.cols != (1 << q)) fail(Errc::BadInput, "gate dimension mismatch");
  if (state.size() != (std::size_t{1} << n)) fail(Errc::BadInput, "state dimension mismatch");
  std::vector<std::uint64_t> bitmask(qubits.size());
  for (int i = 0; i < q; ++i) {
    if (qubits[static_cast<std::size_t>(i)] < 1 || qubits[static_cast<std::size_t>(i)] > n)
      fail(Errc::OutOfRange, "qubit index out of range");
    bitmask[static_cast<std::size_t>(i)] = std::uint64_t{1} << (n - qubits[static_cast<std::size_t>(i)]);
  }
  std::uint64_t rest_mask = (std::size_t{1} << n) - 1;
  for (std::uint64_t b : bitmask) rest_mask &= ~b;

  Vec sub(std::size_t{1} << q), subo(std::size_t{1} << q);
  // iterate over assignments of the untouched qubits
  std::uint64_t base = 0;
  while (true) {
    for (std::uint64_t s = 0; s < sub.size(); ++s) {
      std::uint64_t idx = base;
      for (int i = 0; i < q; ++i)
        if ((s >> (q - 1 - i)) & 1u) idx |= bitmask[static_cast<std::size_t>(i)];
      sub[s] = state[idx];
    }
    for (std::uint64_t r = 0; r < subo.size(); ++r)
      subo[r] = kern::dot(&u.a[r * sub.size()], sub.data(), sub.size());
    for (std::uint64_t s = 0; s < sub.size(); ++s) {
      std::uint64_t idx = base;
      for (int i = 0; i < q; ++i)
        if ((s >> (q - 1 - i)) & 1u) idx |= bitmask[static_cast<std::size_t>(i)];
      state[idx] = subo[s];
    }
    if (base == rest_mask) break;
    base = (base - rest_mask) & rest_mask;  // next subset of rest_mask
  }
}

}  // namespace bpqm::oracle
