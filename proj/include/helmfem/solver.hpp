#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "helmfem/assembly.hpp"

namespace helmfem {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinearSolveReport {
  double residual_norm_rel = 0.0;
  long factor_nnz = 0;      // nonzeros in L plus U
  double solve_time = 0.0;  // seconds, factorisation included
  double rcond = 0.0;       // reciprocal condition estimate of the factor
  int refinement_steps = 0;
};

enum class Ordering { amd, metis };

struct SolverOptions {
  Ordering ordering = Ordering::metis;
  double residual_target = 1e-10;
  int max_refinement = 3;
};

/// Sparse LU factorisation of a square complex matrix (UMFPACK).
class SparseLU {
 public:
  /// Throws SolverError when the matrix is singular or UMFPACK fails.
  explicit SparseLU(const ComplexSparseMatrix& matrix, const SolverOptions& options = {});
  ~SparseLU();
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;

  ComplexVector solve(const ComplexVector& rhs) const;
  long factor_nnz() const { return factor_nnz_; }
  double rcond() const { return rcond_; }

 private:
  std::vector<long> colptr_;
  std::vector<long> rowind_;
  std::vector<cplx> values_;
  void* numeric_ = nullptr;
  long factor_nnz_ = 0;
  double rcond_ = 0.0;
};

struct SolveResult {
  ComplexVector x;
  LinearSolveReport report;
};

/// Direct solve with iterative refinement until the relative residual
/// ||Mx - b|| / ||b|| meets options.residual_target (or the step budget is
/// exhausted; the report carries the achieved value).
SolveResult solve(const ComplexSparseMatrix& matrix, const ComplexVector& rhs,
                  const SolverOptions& options = {});

}  // namespace helmfem
