#include "eolsec/simulation.hpp"

#include "eolsec/errors.hpp"
#include "eolsec/security.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <thread>

namespace eolsec {

void SimConfig::validate() const {
    variant.validate();
    if (replications < 1) throw InvalidArgument("replications must be >= 1");
    if (!(warmup >= 0.0)) throw InvalidArgument("warmup must be >= 0");
    if (std::isnan(horizon) || !(warmup < horizon)) {
        throw InvalidArgument("warmup must be shorter than the horizon");
    }
    if (std::isinf(horizon)) {
        if (max_arrivals == 0) {
            throw InvalidArgument("an infinite horizon needs an arrival budget");
        }
        if (!(profile.total_arrival_rate() > 0.0)) {
            throw InvalidArgument("an arrival budget needs a positive arrival rate");
        }
    }
    if (batches < 2) throw InvalidArgument("at least two batches are required");
    if (window_samples < 1) throw InvalidArgument("window_samples must be >= 1");
    for (int w : window_widths) {
        if (w < 1 || w > profile.capacity()) {
            throw InvalidArgument("window width " + std::to_string(w) + " outside [1, C]");
        }
    }
}

Estimate make_estimate(const std::vector<double>& samples) {
    std::vector<double> xs;
    for (double v : samples) {
        if (!std::isnan(v)) xs.push_back(v);
    }
    Estimate e;
    e.samples = xs.size();
    if (xs.empty()) {
        e.mean = e.std_error = e.ci_half_width = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    double sum = 0.0;
    for (double v : xs) sum += v;
    e.mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) {
        e.std_error = e.ci_half_width = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    double ss = 0.0;
    for (double v : xs) ss += (v - e.mean) * (v - e.mean);
    const double n = static_cast<double>(xs.size());
    e.std_error = std::sqrt(ss / (n - 1.0) / n);
    const boost::math::students_t dist(n - 1.0);
    e.ci_half_width = boost::math::quantile(dist, 0.975) * e.std_error;
    return e;
}

EventCounts& EventCounts::operator+=(const EventCounts& o) {
    call_arrivals += o.call_arrivals;
    accepted += o.accepted;
    resource_blocked += o.resource_blocked;
    frag_blocked += o.frag_blocked;
    reconfig_blocked += o.reconfig_blocked;
    departures += o.departures;
    rp_arrivals += o.rp_arrivals;
    rp_discarded += o.rp_discarded;
    raas_started += o.raas_started;
    daas_started += o.daas_started;
    return *this;
}

namespace {

std::vector<Token> connection_tokens(const ConnectionPattern& n, const DemandProfile& profile) {
    if (n.num_classes() != profile.num_classes() || n.free_slots(profile) < 0) {
        throw InvalidArgument("pattern " + n.render() + " does not fit the link");
    }
    std::vector<Token> tokens;
    for (std::size_t k = 0; k < n.num_classes(); ++k) {
        if (n[k] < 0) throw InvalidArgument("negative connection count");
        tokens.insert(tokens.end(), static_cast<std::size_t>(n[k]), Token::conn(k));
    }
    return tokens;
}

} // namespace

Arrangement sample_random_arrangement(const ConnectionPattern& n, const DemandProfile& profile,
                                      Rng& rng) {
    auto tokens = connection_tokens(n, profile);
    tokens.insert(tokens.end(), static_cast<std::size_t>(n.free_slots(profile)), Token::free());
    // a uniform permutation of the multiset is uniform over its distinct orderings
    std::shuffle(tokens.begin(), tokens.end(), rng);
    return Arrangement(std::move(tokens));
}

Arrangement sample_defragmented_arrangement(const ConnectionPattern& n,
                                            const DemandProfile& profile, Rng& rng) {
    auto tokens = connection_tokens(n, profile);
    std::shuffle(tokens.begin(), tokens.end(), rng);
    const int free = n.free_slots(profile);
    if (free > 0) {
        std::uniform_int_distribution<std::size_t> gap(0, tokens.size());
        const auto at = tokens.begin() + static_cast<long>(gap(rng));
        tokens.insert(at, static_cast<std::size_t>(free), Token::free());
    }
    return Arrangement(std::move(tokens));
}

namespace {

struct Tally {
    std::vector<double> rb_time;
    std::vector<double> fb_time;
    double rcb_time = 0.0;
    double observed = 0.0;
    std::uint64_t arrivals = 0;
    std::uint64_t lost = 0;
    std::vector<double> psa_sum;
    std::vector<double> psa_any_sum;
    std::uint64_t rp_events = 0;
    std::uint64_t reconfig_events = 0;

    Tally(std::size_t classes, std::size_t windows)
        : rb_time(classes, 0.0), fb_time(classes, 0.0), psa_sum(windows, 0.0),
          psa_any_sum(windows, 0.0) {}

    Tally& operator+=(const Tally& o) {
        for (std::size_t k = 0; k < rb_time.size(); ++k) {
            rb_time[k] += o.rb_time[k];
            fb_time[k] += o.fb_time[k];
        }
        rcb_time += o.rcb_time;
        observed += o.observed;
        arrivals += o.arrivals;
        lost += o.lost;
        for (std::size_t w = 0; w < psa_sum.size(); ++w) {
            psa_sum[w] += o.psa_sum[w];
            psa_any_sum[w] += o.psa_any_sum[w];
        }
        rp_events += o.rp_events;
        reconfig_events += o.reconfig_events;
        return *this;
    }
};

struct Sample {
    std::vector<double> rb, fb, psa, psa_any;
    double total_fb = 0.0, rcb = 0.0, bp = 0.0, lost = 0.0;
};

Sample to_sample(const Tally& t, const DemandProfile& profile) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    const std::size_t num_classes = profile.num_classes();
    Sample s;
    s.rb.assign(num_classes, nan);
    s.fb.assign(num_classes, nan);
    s.psa.assign(t.psa_sum.size(), nan);
    s.psa_any.assign(t.psa_sum.size(), nan);
    s.total_fb = s.rcb = s.bp = s.lost = nan;
    if (t.observed > 0.0) {
        s.total_fb = 0.0;
        for (std::size_t k = 0; k < num_classes; ++k) {
            s.rb[k] = t.rb_time[k] / t.observed;
            s.fb[k] = t.fb_time[k] / t.observed;
            s.total_fb += s.fb[k];
        }
        s.rcb = t.rcb_time / t.observed;
        s.bp = overall_blocking(profile, s.rcb, s.rb, s.fb);
    }
    if (t.arrivals > 0) s.lost = static_cast<double>(t.lost) / static_cast<double>(t.arrivals);
    for (std::size_t w = 0; w < t.psa_sum.size(); ++w) {
        if (t.rp_events > 0) s.psa[w] = t.psa_sum[w] / static_cast<double>(t.rp_events);
        if (t.reconfig_events > 0) {
            s.psa_any[w] = t.psa_any_sum[w] / static_cast<double>(t.reconfig_events);
        }
    }
    return s;
}

struct Replication {
    Sample whole;
    std::vector<Sample> batches;
    EventCounts counts;
};

enum class Mode { Serving, Randomizing, Defragmenting };

class LinkSimulator {
public:
    LinkSimulator(const SimConfig& cfg, std::size_t replication)
        : cfg_(cfg), profile_(cfg.profile), num_classes_(profile_.num_classes()),
          tokens_(static_cast<std::size_t>(profile_.capacity()), Token::free()),
          counts_per_class_(num_classes_, 0), admission_(num_classes_, Admission::Accept) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                          static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(replication), 0x5eedu};
        rng_.seed(seq);
        for (std::size_t b = 0; b < cfg.batches; ++b) {
            tallies_.emplace_back(num_classes_, cfg.window_widths.size());
        }
        refresh();
    }

    Replication run() {
        const bool raas_enabled = cfg_.variant.kind != VariantKind::Regular;
        const double lambda_s = raas_enabled ? cfg_.variant.rp_rate : 0.0;
        const double mu_d = cfg_.variant.reconfig_rate;
        std::vector<double> rates(2 * num_classes_ + 2, 0.0);
        double t = 0.0;

        while (true) {
            const bool serving = mode_ == Mode::Serving;
            for (std::size_t k = 0; k < num_classes_; ++k) {
                rates[k] = profile_.traffic(k).arrival_rate;
                rates[num_classes_ + k] =
                    serving ? counts_per_class_[k] * profile_.traffic(k).service_rate : 0.0;
            }
            const bool rp_eligible = !serving || connections_ > 0 || cfg_.randomize_empty;
            rates[2 * num_classes_] = rp_eligible ? lambda_s : 0.0;
            rates[2 * num_classes_ + 1] = serving ? 0.0 : mu_d;
            double total = 0.0;
            for (double r : rates) total += r;

            const double next = total > 0.0
                                    ? t + std::exponential_distribution<double>(total)(rng_)
                                    : std::numeric_limits<double>::infinity();
            accumulate(t, std::min(next, cfg_.horizon));
            if (next >= cfg_.horizon) break;
            t = next;
            post_ = t >= cfg_.warmup;

            double u = std::uniform_real_distribution<double>(0.0, total)(rng_);
            std::size_t event = 0;
            for (std::size_t e = 0; e < rates.size(); ++e) {
                if (rates[e] <= 0.0) continue;
                event = e;
                if (u < rates[e]) break;
                u -= rates[e];
            }

            if (event < num_classes_) {
                on_arrival(event);
                if (cfg_.max_arrivals > 0 && arrivals_ >= cfg_.max_arrivals) break;
            } else if (event < 2 * num_classes_) {
                on_departure(event - num_classes_);
            } else if (event == 2 * num_classes_) {
                on_rp();
            } else {
                on_reconfig_done();
            }
        }

        Replication out;
        Tally whole(num_classes_, cfg_.window_widths.size());
        for (const auto& tally : tallies_) {
            whole += tally;
            out.batches.push_back(to_sample(tally, profile_));
        }
        out.whole = to_sample(whole, profile_);
        out.counts = counts_;
        return out;
    }

private:
    Tally& tally() { return tallies_[batch_]; }

    void accumulate(double from, double to) {
        double lo = std::max(from, cfg_.warmup);
        while (lo < to) {
            double hi = to;
            const bool time_batches = cfg_.max_arrivals == 0;
            if (time_batches && batch_ + 1 < tallies_.size()) {
                const double span = cfg_.horizon - cfg_.warmup;
                const double boundary =
                    cfg_.warmup + span * static_cast<double>(batch_ + 1) /
                                      static_cast<double>(tallies_.size());
                hi = std::min(hi, boundary);
            }
            const double dt = hi - lo;
            Tally& tl = tally();
            tl.observed += dt;
            if (mode_ == Mode::Serving) {
                for (std::size_t k = 0; k < num_classes_; ++k) {
                    if (admission_[k] == Admission::ResourceBlocked) tl.rb_time[k] += dt;
                    if (admission_[k] == Admission::FragBlocked) tl.fb_time[k] += dt;
                }
            } else {
                tl.rcb_time += dt;
            }
            if (hi < to) ++batch_;
            lo = hi;
        }
    }

    void on_arrival(std::size_t k) {
        bool lost = true;
        if (mode_ != Mode::Serving) {
            if (post_) ++counts_.reconfig_blocked;
        } else {
            switch (admission_[k]) {
            case Admission::Accept:
                place(k);
                lost = false;
                if (post_) ++counts_.accepted;
                break;
            case Admission::ResourceBlocked:
                if (post_) ++counts_.resource_blocked;
                break;
            case Admission::FragBlocked:
                if (post_) ++counts_.frag_blocked;
                if (cfg_.variant.kind == VariantKind::RaaSDaaS) {
                    before_ = tokens_;
                    mode_ = Mode::Defragmenting;
                    if (post_) ++counts_.daas_started;
                }
                break;
            }
        }
        if (!post_) return;
        ++counts_.call_arrivals;
        ++arrivals_;
        ++tally().arrivals;
        if (lost) ++tally().lost;
        if (cfg_.max_arrivals > 0 && batch_ + 1 < tallies_.size()) {
            const std::uint64_t boundary =
                cfg_.max_arrivals * (batch_ + 1) / static_cast<std::uint64_t>(tallies_.size());
            if (arrivals_ >= boundary) ++batch_;
        }
    }

    void on_departure(std::size_t k) {
        std::uniform_int_distribution<int> pick(0, counts_per_class_[k] - 1);
        int target = pick(rng_);
        const int d = profile_.demand(k);
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            if (tokens_[i] != Token::conn(k) || target-- > 0) continue;
            tokens_[i] = Token::free();
            tokens_.insert(tokens_.begin() + static_cast<long>(i) + 1,
                           static_cast<std::size_t>(d - 1), Token::free());
            break;
        }
        if (post_) ++counts_.departures;
        refresh();
    }

    void on_rp() {
        if (post_) ++counts_.rp_arrivals;
        if (mode_ != Mode::Serving) {
            if (post_) ++counts_.rp_discarded;
            return;
        }
        before_ = tokens_;
        mode_ = Mode::Randomizing;
        if (post_) ++counts_.raas_started;
    }

    void on_reconfig_done() {
        const ConnectionPattern n = current_pattern();
        const bool randomizing = mode_ == Mode::Randomizing;
        Arrangement after = randomizing ? sample_random_arrangement(n, profile_, rng_)
                                        : sample_defragmented_arrangement(n, profile_, rng_);
        if (post_ && !n.empty() && !cfg_.window_widths.empty()) {
            score_windows(Arrangement(before_), after, randomizing);
        }
        tokens_.assign(after.tokens().begin(), after.tokens().end());
        mode_ = Mode::Serving;
        refresh();
    }

    void score_windows(const Arrangement& before, const Arrangement& after, bool randomizing) {
        const WindowScanner b(before, profile_);
        const WindowScanner a(after, profile_);
        const int c = profile_.capacity();
        Tally& tl = tally();
        for (std::size_t w = 0; w < cfg_.window_widths.size(); ++w) {
            const int width = cfg_.window_widths[w];
            double survival = 0.0;
            if (c <= cfg_.exact_window_limit) {
                survival = b.survival_fraction(a, width);
            } else {
                std::uniform_int_distribution<int> pos(1, c - width + 1);
                int hits = 0;
                for (int s = 0; s < cfg_.window_samples; ++s) {
                    if (b.survives(a, pos(rng_), width)) ++hits;
                }
                survival = static_cast<double>(hits) / cfg_.window_samples;
            }
            if (randomizing) tl.psa_sum[w] += survival;
            tl.psa_any_sum[w] += survival;
        }
        if (randomizing) ++tl.rp_events;
        ++tl.reconfig_events;
    }

    void place(std::size_t k) {
        const int d = profile_.demand(k);
        std::uniform_int_distribution<std::size_t> pick(0, ways_[k] - 1);
        std::size_t target = pick(rng_);
        std::size_t i = 0;
        while (i < tokens_.size()) {
            if (!tokens_[i].is_free()) {
                ++i;
                continue;
            }
            std::size_t end = i;
            while (end < tokens_.size() && tokens_[end].is_free()) ++end;
            const auto run = static_cast<std::size_t>(end - i);
            if (run >= static_cast<std::size_t>(d)) {
                const std::size_t positions = run - static_cast<std::size_t>(d) + 1;
                if (target < positions) {
                    const auto at = tokens_.begin() + static_cast<long>(i + target);
                    tokens_.erase(at, at + d - 1);
                    tokens_[i + target] = Token::conn(k);
                    break;
                }
                target -= positions;
            }
            i = end;
        }
        refresh();
    }

    ConnectionPattern current_pattern() const {
        return ConnectionPattern(std::vector<int>(counts_per_class_.begin(), counts_per_class_.end()));
    }

    void refresh() {
        std::fill(counts_per_class_.begin(), counts_per_class_.end(), 0);
        int total_free = 0;
        int largest = 0;
        int run = 0;
        fragments_.clear();
        for (auto t : tokens_) {
            if (t.is_free()) {
                ++run;
                continue;
            }
            ++counts_per_class_[t.cls()];
            if (run > 0) fragments_.push_back(run);
            run = 0;
        }
        if (run > 0) fragments_.push_back(run);
        for (int f : fragments_) {
            total_free += f;
            largest = std::max(largest, f);
        }
        connections_ = 0;
        for (int c : counts_per_class_) connections_ += c;
        ways_.assign(num_classes_, 0);
        for (std::size_t k = 0; k < num_classes_; ++k) {
            const int d = profile_.demand(k);
            if (largest >= d) {
                admission_[k] = Admission::Accept;
                for (int f : fragments_) {
                    if (f >= d) ways_[k] += static_cast<std::size_t>(f - d + 1);
                }
            } else {
                admission_[k] = total_free >= d ? Admission::FragBlocked
                                                : Admission::ResourceBlocked;
            }
        }
        assert(Arrangement(tokens_).width(profile_) == profile_.capacity());
    }

    const SimConfig& cfg_;
    const DemandProfile& profile_;
    std::size_t num_classes_;
    Rng rng_;
    std::vector<Token> tokens_;
    std::vector<Token> before_;
    std::vector<int> counts_per_class_;
    std::vector<int> fragments_;
    std::vector<std::size_t> ways_;
    std::vector<Admission> admission_;
    int connections_ = 0;
    Mode mode_ = Mode::Serving;
    bool post_ = false;
    std::uint64_t arrivals_ = 0;
    std::vector<Tally> tallies_;
    std::size_t batch_ = 0;
    EventCounts counts_;
};

} // namespace

SimResult run_simulation(const SimConfig& cfg) {
    cfg.validate();
    std::vector<Replication> reps(cfg.replications);

    unsigned workers = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cfg.replications)));
    if (workers == 1) {
        for (std::size_t r = 0; r < cfg.replications; ++r) reps[r] = LinkSimulator(cfg, r).run();
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < cfg.replications; r = next++) {
                    reps[r] = LinkSimulator(cfg, r).run();
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    SimResult result;
    result.replications = cfg.replications;
    result.window_widths = cfg.window_widths;
    result.batch_means = cfg.replications == 1;
    std::vector<const Sample*> samples;
    if (result.batch_means) {
        for (const auto& b : reps.front().batches) samples.push_back(&b);
    } else {
        for (const auto& r : reps) samples.push_back(&r.whole);
    }
    for (const auto& r : reps) result.counts += r.counts;

    auto collect = [&](auto field) {
        std::vector<double> xs;
        xs.reserve(samples.size());
        for (const Sample* s : samples) xs.push_back(field(*s));
        return make_estimate(xs);
    };
    const std::size_t num_classes = cfg.profile.num_classes();
    for (std::size_t k = 0; k < num_classes; ++k) {
        result.rb.push_back(collect([k](const Sample& s) { return s.rb[k]; }));
        result.fb.push_back(collect([k](const Sample& s) { return s.fb[k]; }));
    }
    result.total_fb = collect([](const Sample& s) { return s.total_fb; });
    result.rcb = collect([](const Sample& s) { return s.rcb; });
    result.bp = collect([](const Sample& s) { return s.bp; });
    result.lost_fraction = collect([](const Sample& s) { return s.lost; });
    for (std::size_t w = 0; w < cfg.window_widths.size(); ++w) {
        result.p_sa.push_back(collect([w](const Sample& s) { return s.psa[w]; }));
        result.p_sa_any.push_back(collect([w](const Sample& s) { return s.psa_any[w]; }));
    }
    return result;
}

} // namespace eolsec
