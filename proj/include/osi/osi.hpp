#ifndef OSI_OSI_HPP
#define OSI_OSI_HPP

#include "errors.hpp"
#include "random.hpp"
#include "quadrature.hpp"
#include "distributions.hpp"
#include "weights.hpp"
#include "index_core.hpp"
#include "estimator.hpp"
#include "bias_lab.hpp"
#include "mc_harness.hpp"
#include "parse.hpp"

#endif // OSI_OSI_HPP
