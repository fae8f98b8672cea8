// nufft.hpp
// type-1 nonuniform DFT by Gaussian gridding
#ifndef UNIQSET_NUFFT_HPP
#define UNIQSET_NUFFT_HPP

#include <cstdint>
#include <vector>

#include "uniqset/spectrum.hpp"

namespace uniqset {

struct NufftResult {
  VecC F;               // F[m + M] = sum_e c_e exp(-2 pi i m x_e), |m| <= M
  double abs_err = 0.0;  // bound on |error| per output, = rel_tol * sum |c_e|
};

// spread = gaussian half-width in grid cells; oversampling is at least 2
NufftResult nufft_type1(const std::vector<double>& x, const std::vector<cplx>& c, std::int64_t M,
                        int spread = 16);

// relative accuracy model used for abs_err (conservative)
double nufft_rel_tol(int spread);

}  // namespace uniqset

#endif
