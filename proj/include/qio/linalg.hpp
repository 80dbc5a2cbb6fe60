#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

namespace qio {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;
using Vector2 = Eigen::Vector2cd;
using Vector4 = Eigen::Vector4cd;

// Structural zero tests (unitarity, hermiticity, orthogonality).
inline constexpr double kStructuralTol = 1e-10;
// Entrywise equality of matrices and prescribed images.
inline constexpr double kMatchTol = 1e-12;

// max-norm of U†U - I
double unitarity_defect(const Matrix& u);
bool is_unitary(const Matrix& u, double tol = kStructuralTol);
bool is_hermitian(const Matrix& h, double tol = kStructuralTol);

// Kronecker product, row-major index convention:
// (i*rows_b + k, j*cols_b + l) = a(i,j) * b(k,l)
Matrix tensor(const Matrix& a, const Matrix& b);
Vector tensor(const Vector& a, const Vector& b);

Matrix dagger(const Matrix& m);

// e^{-i h t} for Hermitian h, via eigendecomposition. Throws std::invalid_argument
// if h is not Hermitian within kStructuralTol.
Matrix expm_hermitian(const Matrix& h, double t);

// Unitary with u * sources[j] = targets[j]. Both lists must be orthonormal
// within kStructuralTol. The remaining action extends both lists by
// Gram-Schmidt over the canonical basis in index order, skipping candidates
// with residual norm < 1e-8.
Matrix complete_to_unitary(const std::vector<Vector>& sources,
                           const std::vector<Vector>& targets);

// Singular values of the realignment of a 4x4 operator with respect to the
// 2x2 bipartition, descending.
std::vector<double> operator_schmidt(const Matrix& u);
int operator_schmidt_number(const Matrix& u, double tol = kStructuralTol);

// Reduced density operator over kept subsystems (in the order given by
// `keep`, ascending). `dims` are subsystem dimensions, leftmost = most
// significant index digit.
Matrix partial_trace(const Matrix& rho, const std::vector<int>& dims,
                     const std::vector<int>& keep);
Matrix partial_trace(const Vector& state, const std::vector<int>& dims,
                     const std::vector<int>& keep);

double trace_distance(const Matrix& a, const Matrix& b);

// Haar-random unitary: QR of a complex Gaussian matrix, R diagonal
// phase-fixed so the result is distribution-exact and deterministic per rng.
Matrix haar_unitary(int dim, std::mt19937_64& rng);
Vector haar_state(int dim, std::mt19937_64& rng);

// Canonical orthocomplement of a unit 2-vector: (-conj(b), conj(a)).
Vector2 orthocomplement(const Vector2& v);

}  // namespace qio
