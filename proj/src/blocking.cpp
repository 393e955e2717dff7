#include "eolsec/ctmc.hpp"

#include "eolsec/errors.hpp"

namespace eolsec {

double BlockingReport::total_fb() const {
    double total = 0.0;
    for (double v : fb) total += v;
    return total;
}

double overall_blocking(const DemandProfile& profile, double rcb, const std::vector<double>& rb,
                        const std::vector<double>& fb) {
    double weighted = 0.0;
    double lambda = 0.0;
    for (std::size_t k = 0; k < profile.num_classes(); ++k) {
        const double l = profile.traffic(k).arrival_rate;
        weighted += l * (rb[k] + fb[k]);
        lambda += l;
    }
    return rcb + (lambda > 0.0 ? weighted / lambda : 0.0);
}

BlockingReport blocking_report(const std::vector<double>& pi, const StateSpace& space,
                               const DemandProfile& profile, const ModelVariant& variant) {
    const std::size_t n_regular = space.num_regular();
    const std::size_t n_raas = variant.kind == VariantKind::Regular ? 0 : space.num_raas();
    const std::size_t n_daas = variant.kind == VariantKind::RaaSDaaS ? space.num_daas() : 0;
    if (pi.size() != n_regular + n_raas + n_daas) {
        throw InvalidArgument("distribution size does not match the variant's state count");
    }

    BlockingReport report;
    report.variant = variant.kind;
    const std::size_t num_classes = profile.num_classes();
    report.rb.assign(num_classes, 0.0);
    report.fb.assign(num_classes, 0.0);
    for (std::size_t k = 0; k < num_classes; ++k) {
        for (std::size_t i : space.res_blocked(k)) report.rb[k] += pi[i];
        for (std::size_t i : space.frag_blocked(k)) report.fb[k] += pi[i];
    }
    // every RaaS/DaaS state blocks all classes
    for (std::size_t i = n_regular; i < pi.size(); ++i) report.rcb += pi[i];
    report.bp = overall_blocking(profile, report.rcb, report.rb, report.fb);
    return report;
}

} // namespace eolsec
