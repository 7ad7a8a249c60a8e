#include "abba/advisor/supervisory.hpp"

namespace abba::advisor {

double local_cost(rl::FeatureVector f, double a_hyper, double a_hypo) {
    return a_hyper * f.hyper + a_hypo * f.hypo;
}

double supervisory_cir_smbg(rl::FeatureVector f) {
    if (f.hypo > 0.0) return 0.02 * f.hypo;
    if (f.hyper > 0.0) return -0.02 * f.hyper;
    return 0.0;
}

double supervisory_br_smbg(const SupervisoryInputs& in, rl::FeatureVector f) {
    if (in.hyponumber > 0) return -f.hypo / 8.0;
    if (in.n1 <= 1 && in.n2 >= 2) return f.hyper / 30.0;
    if (in.n1 >= 2 && in.n2 <= 1) return -f.hypo / 30.0;
    return 0.0;
}

double supervisory_cgm(rl::FeatureVector f, Target target) {
    if (!(f.hypo > 0.0)) return 0.0;
    const double sign = target == Target::Basal ? -1.0 : 1.0;
    const double gain = f.hyper > 0.0 ? 0.05 : 0.1;
    return sign * gain * f.hypo;
}

}  // namespace abba::advisor
