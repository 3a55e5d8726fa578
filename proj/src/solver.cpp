#include "helmfem/solver.hpp"

#include <chrono>
#include <sstream>

#include <umfpack.h>

namespace helmfem {

namespace {

std::string umfpack_message(const char* stage, long status, const double* info) {
  std::ostringstream msg;
  msg << "UMFPACK " << stage << " failed with status " << status;
  if (status == UMFPACK_WARNING_singular_matrix) msg << " (singular matrix)";
  if (status == UMFPACK_ERROR_out_of_memory) msg << " (out of memory)";
  if (info) msg << ", rcond estimate " << info[UMFPACK_RCOND];
  return msg.str();
}

}  // namespace

SparseLU::SparseLU(const ComplexSparseMatrix& matrix, const SolverOptions& options) {
  if (matrix.rows() != matrix.cols()) throw SolverError("SparseLU: matrix is not square");
  ComplexSparseMatrix m = matrix;
  m.makeCompressed();
  const long n = m.rows();
  colptr_.assign(m.outerIndexPtr(), m.outerIndexPtr() + n + 1);
  rowind_.assign(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros());
  values_.assign(m.valuePtr(), m.valuePtr() + m.nonZeros());
  const double* ax = reinterpret_cast<const double*>(values_.data());

  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  umfpack_zl_defaults(control);
  control[UMFPACK_ORDERING] =
      options.ordering == Ordering::metis ? UMFPACK_ORDERING_METIS : UMFPACK_ORDERING_AMD;
  control[UMFPACK_IRSTEP] = 0;
  void* symbolic = nullptr;
  long status = umfpack_zl_symbolic(n, n, colptr_.data(), rowind_.data(), ax, nullptr, &symbolic,
                                    control, info);
  if (status != UMFPACK_OK) throw SolverError(umfpack_message("symbolic", status, nullptr));
  status = umfpack_zl_numeric(colptr_.data(), rowind_.data(), ax, nullptr, symbolic, &numeric_,
                              control, info);
  umfpack_zl_free_symbolic(&symbolic);
  if (status != UMFPACK_OK) {
    const std::string msg = umfpack_message("numeric", status, info);
    if (numeric_) umfpack_zl_free_numeric(&numeric_);
    throw SolverError(msg);
  }
  factor_nnz_ = static_cast<long>(info[UMFPACK_LNZ] + info[UMFPACK_UNZ]);
  rcond_ = info[UMFPACK_RCOND];
}

SparseLU::~SparseLU() {
  if (numeric_) umfpack_zl_free_numeric(&numeric_);
}

ComplexVector SparseLU::solve(const ComplexVector& rhs) const {
  const long n = static_cast<long>(colptr_.size()) - 1;
  if (rhs.size() != n) throw SolverError("SparseLU: right-hand side has the wrong length");
  ComplexVector x(n);
  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  umfpack_zl_defaults(control);
  control[UMFPACK_IRSTEP] = 0;
  const long status = umfpack_zl_solve(
      UMFPACK_A, colptr_.data(), rowind_.data(), reinterpret_cast<const double*>(values_.data()),
      nullptr, reinterpret_cast<double*>(x.data()), nullptr,
      reinterpret_cast<const double*>(rhs.data()), nullptr, numeric_, control, info);
  if (status != UMFPACK_OK) throw SolverError(umfpack_message("solve", status, info));
  return x;
}

SolveResult solve(const ComplexSparseMatrix& matrix, const ComplexVector& rhs,
                  const SolverOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult out;
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    out.x = ComplexVector::Zero(matrix.cols());
    return out;
  }
  const SparseLU lu(matrix, options);
  out.x = lu.solve(rhs);
  ComplexVector r = rhs - matrix * out.x;
  double rel = r.norm() / bnorm;
  int steps = 0;
  while (rel > options.residual_target && steps < options.max_refinement) {
    out.x += lu.solve(r);
    r = rhs - matrix * out.x;
    const double next = r.norm() / bnorm;
    ++steps;
    if (!(next < rel)) {
      rel = next;
      break;
    }
    rel = next;
  }
  out.report.residual_norm_rel = rel;
  out.report.factor_nnz = lu.factor_nnz();
  out.report.rcond = lu.rcond();
  out.report.refinement_steps = steps;
  out.report.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace helmfem
