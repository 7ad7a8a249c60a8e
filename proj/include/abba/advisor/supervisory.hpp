#pragma once

#include "abba/advisor/features.hpp"

namespace abba::advisor {

enum class Target { Basal, Cir };

/// Weighted local cost; hypoglycaemia counts ten times as much as hyperglycaemia.
double local_cost(rl::FeatureVector f, double a_hyper = 1.0, double a_hypo = 10.0);

/// SMBG supervisory action for a CIR. Any hypo reading raises the ratio
/// (smaller bolus); hyper-only lowers it.
double supervisory_cir_smbg(rl::FeatureVector f);

/// SMBG supervisory action for the basal rate, driven by reading counts in
/// the 70/80/130 mg/dL bands. Branches are tested in order.
double supervisory_br_smbg(const SupervisoryInputs& in, rl::FeatureVector f);

/// CGM supervisory action. Only hypoglycaemia produces a correction: basal
/// goes down and the CIR goes up by the same magnitude.
double supervisory_cgm(rl::FeatureVector f, Target target);

}  // namespace abba::advisor
