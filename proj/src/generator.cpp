#include "eolsec/ctmc.hpp"

#include "eolsec/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace eolsec {

std::string_view to_string(VariantKind kind) {
    switch (kind) {
    case VariantKind::Regular: return "regular";
    case VariantKind::RaaS: return "raas";
    case VariantKind::RaaSDaaS: return "raas_daas";
    }
    return "unknown";
}

VariantKind parse_variant(std::string_view name) {
    std::string key;
    for (char c : name) {
        key += c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (key == "regular") return VariantKind::Regular;
    if (key == "raas") return VariantKind::RaaS;
    if (key == "raas_daas" || key == "raasdaas") return VariantKind::RaaSDaaS;
    throw InvalidArgument("unknown model variant '" + std::string(name) + "'");
}

void ModelVariant::validate() const {
    if (kind == VariantKind::Regular) {
        if (rp_rate != 0.0) throw InvalidArgument("regular variant requires lambda_S = 0");
        return;
    }
    if (!(reconfig_rate > 0.0) || !std::isfinite(reconfig_rate)) {
        throw InvalidArgument("reconfiguration rate mu_d must be finite and > 0");
    }
    if (!(rp_rate >= 0.0) || !std::isfinite(rp_rate)) {
        throw InvalidArgument("RP rate lambda_S must be finite and >= 0");
    }
}

double RateMatrix::rate(std::size_t i, std::size_t j) const {
    return q.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

namespace {

bool same_structure(const DemandProfile& a, const DemandProfile& b) {
    if (a.capacity() != b.capacity() || a.num_classes() != b.num_classes()) return false;
    for (std::size_t k = 0; k < a.num_classes(); ++k) {
        if (a.demand(k) != b.demand(k)) return false;
    }
    return true;
}

} // namespace

RateMatrix assemble_generator(const StateSpace& space, const DemandProfile& profile,
                              const ModelVariant& variant) {
    variant.validate();
    if (!same_structure(space.profile(), profile)) {
        throw InvalidArgument("state space was built for a different capacity or demand set");
    }

    RateMatrix out;
    out.num_regular = space.num_regular();
    out.num_raas = variant.kind == VariantKind::Regular ? 0 : space.num_raas();
    out.num_daas = variant.kind == VariantKind::RaaSDaaS ? space.num_daas() : 0;
    const std::size_t n = out.size();
    const std::size_t num_classes = profile.num_classes();
    const double mu_d = variant.reconfig_rate;
    const double lambda_s = variant.kind == VariantKind::Regular ? 0.0 : variant.rp_rate;

    using Triplet = Eigen::Triplet<double, Eigen::Index>;
    std::vector<Triplet> entries;
    std::vector<double> outflow(n, 0.0);
    auto add = [&](std::size_t from, std::size_t to, double rate) {
        if (rate <= 0.0) return;
        entries.emplace_back(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to), rate);
        outflow[from] += rate;
    };

    for (std::size_t i = 0; i < space.num_regular(); ++i) {
        const Arrangement& arr = space.regular(i);
        const std::size_t p = space.pattern_of(i);
        const ConnectionPattern& n_i = space.pattern(p);

        for (std::size_t k = 0; k < num_classes; ++k) {
            const double lambda = profile.traffic(k).arrival_rate;
            if (lambda <= 0.0) continue;
            switch (space.admission(i, k)) {
            case Admission::Accept: {
                const auto targets = placements(arr, profile, k);
                const double share = lambda / static_cast<double>(targets.size());
                for (const auto& t : targets) add(i, *space.find(t), share);
                break;
            }
            case Admission::FragBlocked:
                if (variant.kind == VariantKind::RaaSDaaS) {
                    add(i, out.daas_index(*space.daas_of_pattern(p)), lambda);
                }
                break;
            case Admission::ResourceBlocked:
                break;
            }
        }

        for (std::size_t k = 0; k < num_classes; ++k) {
            if (n_i[k] == 0) continue;
            const double mu = profile.traffic(k).service_rate;
            for (const auto& r : removals(arr, profile, k)) {
                add(i, *space.find(r.target), mu * r.multiplicity);
            }
        }

        if (out.num_raas > 0) {
            if (auto r = space.raas_of_pattern(p)) add(i, out.raas_index(*r), lambda_s);
        }
    }

    for (std::size_t r = 0; r < out.num_raas; ++r) {
        const auto& members = space.gamma(space.raas_pattern(r));
        const double share = mu_d / static_cast<double>(members.size());
        for (std::size_t i : members) add(out.raas_index(r), i, share);
    }

    for (std::size_t d = 0; d < out.num_daas; ++d) {
        const auto& targets = space.defrag_targets(d);
        const double share = mu_d / static_cast<double>(targets.size());
        for (std::size_t i : targets) add(out.daas_index(d), i, share);
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (outflow[i] > 0.0) {
            entries.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i),
                                 -outflow[i]);
        }
    }

    out.q.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    out.q.setFromTriplets(entries.begin(), entries.end());
    out.q.makeCompressed();
    return out;
}

namespace {

// Tarjan's strongly connected components over the positive off-diagonal
// pattern, iterative. Returns the component id per state.
std::vector<std::size_t> strongly_connected(const RateMatrix& m, std::size_t& num_components) {
    const auto& q = m.q;
    const std::size_t n = m.size();
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unvisited), low(n, 0), comp(n, unvisited);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t counter = 0;
    num_components = 0;

    struct Frame {
        std::size_t v;
        Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it;
    };

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        std::vector<Frame> frames;
        auto open = [&](std::size_t v) {
            index[v] = low[v] = counter++;
            stack.push_back(v);
            on_stack[v] = true;
            frames.push_back({v, {q, static_cast<Eigen::Index>(v)}});
        };
        open(root);
        while (!frames.empty()) {
            auto& f = frames.back();
            bool descended = false;
            for (; f.it; ++f.it) {
                const auto w = static_cast<std::size_t>(f.it.col());
                if (w == f.v || f.it.value() <= 0.0) continue;
                if (index[w] == unvisited) {
                    ++f.it;
                    open(w);
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[f.v] = std::min(low[f.v], index[w]);
            }
            if (descended) continue;
            const std::size_t v = f.v;
            frames.pop_back();
            if (!frames.empty()) {
                auto& parent = frames.back();
                low[parent.v] = std::min(low[parent.v], low[v]);
            }
            if (low[v] == index[v]) {
                std::size_t w = 0;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = num_components;
                } while (w != v);
                ++num_components;
            }
        }
    }
    return comp;
}

} // namespace

std::size_t count_closed_classes(const RateMatrix& m) {
    std::size_t num_components = 0;
    const auto comp = strongly_connected(m, num_components);
    std::vector<bool> leaks(num_components, false);
    for (Eigen::Index i = 0; i < m.q.outerSize(); ++i) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m.q, i); it; ++it) {
            const auto from = static_cast<std::size_t>(i);
            const auto to = static_cast<std::size_t>(it.col());
            if (from != to && it.value() > 0.0 && comp[from] != comp[to]) leaks[comp[from]] = true;
        }
    }
    return static_cast<std::size_t>(std::count(leaks.begin(), leaks.end(), false));
}

bool is_irreducible(const RateMatrix& m) {
    std::size_t num_components = 0;
    (void)strongly_connected(m, num_components);
    return num_components == 1;
}

} // namespace eolsec
