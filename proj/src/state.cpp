#include "qio/state.hpp"

#include <stdexcept>

namespace qio {

namespace {

long product_of(const std::vector<int>& dims) {
  long p = 1;
  for (int d : dims) p *= d;
  return p;
}

std::vector<long> strides_of(const std::vector<int>& dims) {
  std::vector<long> s(dims.size(), 1);
  for (int i = (int)dims.size() - 2; i >= 0; --i) s[i] = s[i + 1] * dims[i + 1];
  return s;
}

}  // namespace

StateVector::StateVector(Vector amps, std::vector<int> dims)
    : amplitudes(std::move(amps)), subsystem_dims(std::move(dims)) {
  if (product_of(subsystem_dims) != amplitudes.size())
    throw std::invalid_argument("StateVector: dims do not match amplitude count");
}

StateVector StateVector::zero(const std::vector<int>& dims) {
  Vector v = Vector::Zero(product_of(dims));
  v(0) = 1.0;
  return StateVector(std::move(v), dims);
}

StateVector StateVector::product(const std::vector<Vector>& factors) {
  Vector v = Vector::Ones(1);
  std::vector<int> dims;
  for (const auto& f : factors) {
    v = tensor(v, f);
    dims.push_back((int)f.size());
  }
  return StateVector(std::move(v), dims);
}

void StateVector::apply(const Matrix& u, const std::vector<int>& targets) {
  const int n = subsystem_count();
  long block = 1;
  for (int t : targets) {
    if (t < 0 || t >= n) throw std::invalid_argument("apply: invalid subsystem index");
    block *= subsystem_dims[t];
  }
  if (u.rows() != block || u.cols() != block)
    throw std::invalid_argument("apply: operator dimension mismatch");

  auto stride = strides_of(subsystem_dims);
  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (std::find(targets.begin(), targets.end(), i) == targets.end()) rest.push_back(i);

  // offsets of the target block relative to a base index
  std::vector<long> toff(block);
  for (long b = 0; b < block; ++b) {
    long off = 0, f = b;
    for (int i = (int)targets.size() - 1; i >= 0; --i) {
      int d = subsystem_dims[targets[i]];
      off += (f % d) * stride[targets[i]];
      f /= d;
    }
    toff[b] = off;
  }

  long rest_total = dim() / block;
  Vector scratch(block);
  for (long r = 0; r < rest_total; ++r) {
    long base = 0, f = r;
    for (int i = (int)rest.size() - 1; i >= 0; --i) {
      int d = subsystem_dims[rest[i]];
      base += (f % d) * stride[rest[i]];
      f /= d;
    }
    for (long b = 0; b < block; ++b) scratch(b) = amplitudes(base + toff[b]);
    scratch = u * scratch;
    for (long b = 0; b < block; ++b) amplitudes(base + toff[b]) = scratch(b);
  }
}

void StateVector::swap_subsystems(int a, int b) {
  if (a == b) return;
  if (subsystem_dims[a] != subsystem_dims[b])
    throw std::invalid_argument("swap: subsystem dimensions differ");
  int d = subsystem_dims[a];
  Matrix s = Matrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(i * d + j, j * d + i) = 1.0;
  apply(s, {a, b});
}

Matrix StateVector::reduced_density(const std::vector<int>& keep) const {
  return partial_trace(amplitudes, subsystem_dims, keep);
}

Complex StateVector::overlap(const StateVector& other) const {
  if (other.dim() != dim()) throw std::invalid_argument("overlap: dimension mismatch");
  return amplitudes.dot(other.amplitudes);
}

double StateVector::fidelity(const StateVector& other) const {
  return std::norm(overlap(other));
}

double StateVector::component_norm(int sub, int value) const {
  auto stride = strides_of(subsystem_dims);
  double acc = 0.0;
  for (long i = 0; i < dim(); ++i)
    if ((i / stride[sub]) % subsystem_dims[sub] == value) acc += std::norm(amplitudes(i));
  return std::sqrt(acc);
}

StateVector StateVector::project(int sub, int value) const {
  auto stride = strides_of(subsystem_dims);
  std::vector<int> dims;
  for (int i = 0; i < subsystem_count(); ++i)
    if (i != sub) dims.push_back(subsystem_dims[i]);
  Vector out(dim() / subsystem_dims[sub]);
  long j = 0;
  for (long i = 0; i < dim(); ++i)
    if ((i / stride[sub]) % subsystem_dims[sub] == value) out(j++) = amplitudes(i);
  return StateVector(std::move(out), dims);
}

}  // namespace qio
