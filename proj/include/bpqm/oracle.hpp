#pragma once

#include <vector>

#include "bpqm/dist.hpp"
#include "bpqm/gf2.hpp"
#include "bpqm/mpg.hpp"

// Brute-force dense linear algebra ground truth. All channel states in scope
// have real amplitudes, so everything here is real symmetric/orthogonal.

namespace bpqm::oracle {

using dist::Distribution;
using gf2::BitMatrix;
using gf2::BitVector;

using Vec = std::vector<double>;

struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;  // row-major

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}
  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
};

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
double max_abs_diff(const Mat& a, const Mat& b);

/// Channel state amplitudes: psi[z] = (-1)^{x.z} sqrt(P(z)).
Vec spsc_state(const Distribution& p, const BitVector& x);

/// <psi(P,x)|psi(P,y)> = sum_z P(z) (-1)^{(x xor y).z}.
double spsc_overlap(const Distribution& p, const BitVector& x, const BitVector& y);

/// Mixed channel output W(x) = 2^{-(k-l)} sum_r |psi_{(x||r)G}><...| as a
/// dense 2^n x 2^n matrix.
Mat channel_output(const mpg::SdtInstance& inst, const BitVector& x);

/// The primitive node unitary U = U2 U1 as a dense orthogonal matrix.
/// U1 permutes basis states along M, U2 applies per-(y,s) Householder
/// reflections taking |xi_{y,s}> to |0..0>. Guarded at n <= 12.
Mat pno_matrix(const mpg::SdtInstance& inst);

/// Max entrywise deviation between U W(x) U^T and the residual-channel form
/// sum_s P_S(s) spsc[P_{Y|S=s}](x) (x) |s><s| (x) |0><0|, over all inputs x.
/// Guarded at n <= 10.
double verify_node_lemma(const mpg::SdtInstance& inst);

struct SymEig {
  Vec eigenvalues;
  Mat eigenvectors_rows;  // row i = eigenvector for eigenvalues[i]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix; iterates until the
/// off-diagonal Frobenius norm falls below `tol`.
SymEig symmetric_eigen(Mat a, double tol = 1e-13);

/// Optimal binary discrimination probability 1/2 + 1/4 ||rho0 - rho1||_1.
double helstrom(const Mat& rho0, const Mat& rho1);

/// Gram matrix G_{x,y} = <Psi_x|Psi_y> of the codeword states over the
/// product channel with per-bit parameters p. Guarded at k <= 10.
Mat gram_matrix(const BitMatrix& g, const std::vector<double>& p);

/// Square-root measurement block success 2^{-k} sum_x ((G^{1/2})_{xx})^2.
/// Throws SingularGram when the states are linearly dependent.
double pgm_block_success(const Mat& gram);

/// Block success of chaining per-bit optimal projective measurements over k
/// independent codeword bits, evaluated inside the 2^k-dimensional span of
/// the codeword states. Guarded at n <= 10, k <= 8.
double sequential_block_success(const BitMatrix& g, const std::vector<double>& p);

/// Helstrom value for decoding codeword bit `bit` (1-based), computed in the
/// codeword-state span via the Gram matrix.
double helstrom_bit_success(const BitMatrix& g, const std::vector<double>& p, int bit);

/// Dense-route Helstrom for the same task; builds the 2^n density matrices.
double helstrom_bit_success_dense(const BitMatrix& g, const std::vector<double>& p, int bit);

/// Applies a 2^q x 2^q matrix U to the listed qubits (1-based, qubit 1 = most
/// significant index bit) of a 2^n amplitude vector.
void apply_on_qubits(Vec& state, int n, const Mat& u, const std::vector<int>& qubits);

}  // namespace bpqm::oracle
