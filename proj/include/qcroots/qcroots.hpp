#pragma once

// Umbrella header: square roots modulo an odd prime via closed-form
// residue-class formulas, with derivation, interpolation, and an
// exhaustive verification harness.

#include "qcroots/core_arith.hpp"
#include "qcroots/closed_form.hpp"
#include "qcroots/oracle.hpp"
#include "qcroots/general_poly.hpp"
#include "qcroots/derivation.hpp"
#include "qcroots/solve.hpp"
#include "qcroots/verify.hpp"
