#include "qio/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qio {

double unitarity_defect(const Matrix& u) {
  if (u.rows() != u.cols()) return 1.0;
  Matrix d = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
  return d.cwiseAbs().maxCoeff();
}

bool is_unitary(const Matrix& u, double tol) { return unitarity_defect(u) <= tol; }

bool is_hermitian(const Matrix& h, double tol) {
  if (h.rows() != h.cols()) return false;
  return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Matrix tensor(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector tensor(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Matrix dagger(const Matrix& m) { return m.adjoint(); }

Matrix expm_hermitian(const Matrix& h, double t) {
  if (!is_hermitian(h))
    throw std::invalid_argument("expm_hermitian: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const auto& v = es.eigenvectors();
  Vector phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k)
    phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * t));
  return v * phases.asDiagonal() * v.adjoint();
}

namespace {

// Extends the columns of `q` (assumed orthonormal) to a full orthonormal
// basis by Gram-Schmidt over canonical basis vectors in index order.
// Candidates with residual norm < 1e-8 are skipped. Two orthogonalization
// passes keep the result orthonormal to machine precision.
Matrix extend_basis(const std::vector<Vector>& given, Eigen::Index dim) {
  Matrix q(dim, dim);
  Eigen::Index m = 0;
  for (const auto& v : given) q.col(m++) = v;
  for (Eigen::Index k = 0; k < dim && m < dim; ++k) {
    Vector v = Vector::Zero(dim);
    v(k) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      v -= q.leftCols(m) * (q.leftCols(m).adjoint() * v);
    double n = v.norm();
    if (n < 1e-8) continue;
    q.col(m++) = v / n;
  }
  if (m != dim)
    throw std::runtime_error("complete_to_unitary: basis extension failed");
  return q;
}

}  // namespace

Matrix complete_to_unitary(const std::vector<Vector>& sources,
                           const std::vector<Vector>& targets) {
  if (sources.size() != targets.size() || sources.empty())
    throw std::invalid_argument("complete_to_unitary: mismatched prescription");
  const Eigen::Index dim = sources.front().size();
  auto check_orthonormal = [&](const std::vector<Vector>& vs, const char* which) {
    for (size_t i = 0; i < vs.size(); ++i) {
      if (vs[i].size() != dim)
        throw std::invalid_argument("complete_to_unitary: dimension mismatch");
      for (size_t j = 0; j <= i; ++j) {
        Complex g = vs[j].dot(vs[i]);
        double want = (i == j) ? 1.0 : 0.0;
        if (std::abs(g - want) > kStructuralTol)
          throw std::invalid_argument(std::string("complete_to_unitary: ") +
                                      which + " vectors not orthonormal");
      }
    }
  };
  check_orthonormal(sources, "source");
  check_orthonormal(targets, "target");

  Matrix s = extend_basis(sources, dim);
  Matrix t = extend_basis(targets, dim);
  return t * s.adjoint();
}

std::vector<double> operator_schmidt(const Matrix& u) {
  if (u.rows() != 4 || u.cols() != 4)
    throw std::invalid_argument("operator_schmidt: expected a 4x4 matrix");
  // Realignment: R[(i,k),(j,l)] = U[(i,j),(k,l)], first factor indices (i,k).
  Matrix4 r;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) r(2 * i + k, 2 * j + l) = u(2 * i + j, 2 * k + l);
  Eigen::JacobiSVD<Matrix> svd(r);
  std::vector<double> out(svd.singularValues().data(),
                          svd.singularValues().data() + 4);
  return out;
}

int operator_schmidt_number(const Matrix& u, double tol) {
  auto sv = operator_schmidt(u);
  return (int)std::count_if(sv.begin(), sv.end(), [&](double s) { return s > tol; });
}

Matrix partial_trace(const Matrix& rho, const std::vector<int>& dims,
                     const std::vector<int>& keep) {
  const int n = (int)dims.size();
  long total = 1;
  for (int d : dims) total *= d;
  if (rho.rows() != total || rho.cols() != total)
    throw std::invalid_argument("partial_trace: dimension mismatch");
  for (int k : keep)
    if (k < 0 || k >= n) throw std::invalid_argument("partial_trace: invalid subsystem index");

  std::vector<int> traced;
  for (int i = 0; i < n; ++i)
    if (std::find(keep.begin(), keep.end(), i) == keep.end()) traced.push_back(i);

  long dk = 1, dt = 1;
  for (int k : keep) dk *= dims[k];
  for (int k : traced) dt *= dims[k];

  // strides, leftmost subsystem most significant
  std::vector<long> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];

  auto offset = [&](const std::vector<int>& subs, long flat) {
    long off = 0;
    for (int i = (int)subs.size() - 1; i >= 0; --i) {
      int d = dims[subs[i]];
      off += (flat % d) * stride[subs[i]];
      flat /= d;
    }
    return off;
  };

  Matrix out = Matrix::Zero(dk, dk);
  for (long a = 0; a < dk; ++a)
    for (long b = 0; b < dk; ++b) {
      Complex acc = 0.0;
      for (long t = 0; t < dt; ++t) {
        long ot = offset(traced, t);
        acc += rho(offset(keep, a) + ot, offset(keep, b) + ot);
      }
      out(a, b) = acc;
    }
  return out;
}

Matrix partial_trace(const Vector& state, const std::vector<int>& dims,
                     const std::vector<int>& keep) {
  return partial_trace(Matrix(state * state.adjoint()), dims, keep);
}

double trace_distance(const Matrix& a, const Matrix& b) {
  Matrix d = a - b;
  Eigen::SelfAdjointEigenSolver<Matrix> es((d + d.adjoint()) / 2.0);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Matrix haar_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix z(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) z(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    Complex d = r(j, j);
    q.col(j) *= (std::abs(d) > 0) ? d / std::abs(d) : 1.0;
  }
  return q;
}

Vector haar_state(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
  return v / v.norm();
}

Vector2 orthocomplement(const Vector2& v) {
  return Vector2(-std::conj(v(1)), std::conj(v(0)));
}

}  // namespace qio
