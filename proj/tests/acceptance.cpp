// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include "amhedge/bounds.hpp"
#include "amhedge/strong_models.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <chrono>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace amhedge;
using testing::q;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Criterion {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            detail << " first failure: " << what;
        }
        ok = ok && cond;
    }
};

// Every certificate produced along the way, re-verified for criterion 6.
struct CertificateLog {
    std::size_t checked = 0;
    std::vector<std::string> failures;

    void check(const Problem& problem, const BoundResult& r, const std::string& where) {
        ++checked;
        const auto report = verify_certificate(problem, r.certificate, r.value);
        if (!report.ok()) {
            failures.push_back(where + " " + to_string(r.kind) + ": " + report.failures.front());
        }
    }
};

CertificateLog certs;
int failed = 0;

void print(int n, const std::string& name, Criterion& c, double elapsed) {
    std::cout << (c.ok ? "PASS" : "FAIL") << " " << n << " " << name << ":" << c.detail.str() << " ["
              << elapsed << " s]\n";
    failed += c.ok ? 0 : 1;
}

void criterion_1() {
    Criterion c;
    const auto t0 = Clock::now();
    const Problem p = testing::example_problem();
    const auto strong = strong_value(p);
    const auto weak = weak_value(p);
    const auto hedge = superhedge(p);
    const auto lag = lagrangian_dual(p);
    const Problem single = testing::example_problem_single_instrument();
    const auto lag_single = lagrangian_dual(single);
    const Rational h4 = robust_penalized_value(single, std::vector<Rational>{q(4)}).value;
    for (const auto* r : {&strong, &weak, &hedge, &lag}) {
        certs.check(p, *r, "example");
    }
    certs.check(single, lag_single, "example single instrument");
    const double elapsed = seconds_since(t0);

    c.require(strong.value == q(35, 10), "strong " + to_string(strong.value));
    c.require(weak.value == q(18, 5), "weak " + to_string(weak.value));
    c.require(hedge.value == q(18, 5), "superhedge " + to_string(hedge.value));
    c.require(lag.value == q(36, 10), "lagrangian " + to_string(lag.value));
    c.require(lag_single.value == q(36, 10), "lagrangian single " + to_string(lag_single.value));
    c.require(h4 == q(36, 10), "h(4) " + to_string(h4));
    c.require(weak.value - strong.value == q(1, 10), "gap " + to_string(weak.value - strong.value));
    c.require(elapsed < 5.0, "runtime");
    c.detail << " strong=" << to_string(strong.value) << " weak=" << to_string(weak.value)
             << " superhedge=" << to_string(hedge.value) << " lagrangian=" << to_string(lag.value)
             << " h(4)=" << to_string(h4) << " gap=" << to_string(weak.value - strong.value);
    print(1, "worked example", c, elapsed);
}

void criterion_2() {
    Criterion c;
    const auto t0 = Clock::now();
    const Problem p = testing::example_problem();
    const auto lowest = lowest_model_value(p);
    const auto sub = subhedge(p);
    certs.check(p, lowest, "example");
    certs.check(p, sub, "example");

    // Consistent segment: (p+s)/2 = 2/5 inside the box, i.e. s in [1/20, 1/4].
    std::optional<Rational> closed_min;
    std::optional<Rational> model_min;
    for (long k = 0; k <= 80; ++k) {
        const Rational s = q(1, 20) + q(k, 400);
        const Rational pp = q(4, 5) - s;
        Rational kink = 1 - 8 * s;
        if (sgn(kink) < 0) {
            kink = 0;
        }
        const Rational closed = 4 * (pp + s) + kink / 2;
        const Rational direct = optimal_stopping(make_example_model(pp, s), p.payoff).value;
        c.require(closed == direct, "closed form vs backward induction at s=" + to_string(s));
        if (!closed_min || closed < *closed_min) {
            closed_min = closed;
        }
        if (!model_min || direct < *model_min) {
            model_min = direct;
        }
    }
    const double elapsed = seconds_since(t0);
    c.require(*closed_min == q(16, 5), "segment minimum " + to_string(*closed_min));
    c.require(lowest.value == *closed_min, "lowest_model " + to_string(lowest.value));
    c.require(sub.value == *closed_min, "subhedge " + to_string(sub.value));
    c.detail << " lowest_model=" << to_string(lowest.value) << " subhedge=" << to_string(sub.value)
             << " segment brute force=" << to_string(*closed_min);
    print(2, "lower bounds", c, elapsed);
}

void criterion_3() {
    Criterion c;
    const auto t0 = Clock::now();
    const Problem p = testing::example_problem();
    std::size_t points = 0;
    for (long i = 0; i <= 6; ++i) {
        for (long j = 0; j <= 6; ++j) {
            const Rational pp = q(1, 2) + q(i, 24);
            const Rational s = q(j, 24);
            Rational kink = 1 - 8 * s;
            if (sgn(kink) < 0) {
                kink = 0;
            }
            const Rational expected = 4 * (pp + s) + kink / 2;
            const Rational got = optimal_stopping(make_example_model(pp, s), p.payoff).value;
            c.require(got == expected, "p=" + to_string(pp) + " s=" + to_string(s));
            ++points;
        }
    }
    c.detail << " " << points << " grid points";
    c.require(points >= 25, "grid size");
    print(3, "closed form", c, seconds_since(t0));
}

void criterion_4() {
    Criterion c;
    const auto t0 = Clock::now();
    constexpr std::size_t kInstances = 250;
    std::size_t gaps = 0;
    for (std::uint64_t seed = 0; seed < kInstances; ++seed) {
        const Problem p = testing::random_instance(seed);
        const std::string tag = "seed " + std::to_string(seed);
        const DualityReport r = duality_report(p);
        for (const auto& b : r.bounds) {
            certs.check(p, b, tag);
        }
        const Rational& strong = r.get(BoundKind::strong).value;
        const Rational& weak = r.get(BoundKind::weak).value;
        const Rational& sub = r.get(BoundKind::subhedge).value;
        c.require(weak == r.get(BoundKind::superhedge).value, tag + " weak != superhedge");
        c.require(sub == r.get(BoundKind::lowest_model).value, tag + " subhedge != lowest_model");
        c.require(sub <= strong && strong <= weak, tag + " ordering");
        gaps += strong < weak ? 1 : 0;

        AmericanPayoff european;
        for (const auto& [key, a] : p.payoff.values) {
            if (key.first == p.lattice.horizon()) {
                european.values[key] = a;
            }
        }
        const Problem e = testing::with_payoff(p, european);
        const auto es = strong_value(e);
        const auto ew = weak_value(e);
        certs.check(e, es, tag + " european");
        certs.check(e, ew, tag + " european");
        c.require(es.value == ew.value, tag + " european strong != weak");
    }
    const double elapsed = seconds_since(t0);
    c.require(elapsed < 120.0, "runtime");
    c.detail << " " << kInstances << " instances, " << gaps << " with a natural-filtration gap";
    print(4, "duality properties", c, elapsed);
}

void criterion_5() {
    Criterion c;
    const auto t0 = Clock::now();
    constexpr std::size_t kInstances = 60;
    for (std::uint64_t seed = 0; seed < kInstances; ++seed) {
        const Problem p = testing::small_instance(seed);
        const std::string tag = "seed " + std::to_string(seed);
        const auto oracle = testing::strong_by_vertices(p);
        const auto r = strong_value(p);
        certs.check(p, r, tag);
        c.require(oracle.has_value(), tag + " empty polytope");
        c.require(oracle && *oracle == r.value, tag + " strong " + to_string(r.value));
    }
    c.detail << " " << kInstances << " instances with at most 12 paths";
    print(5, "vertex oracle", c, seconds_since(t0));
}

void criterion_6() {
    Criterion c;
    const auto t0 = Clock::now();
    const Problem p = testing::example_problem();
    WeakCertificate m;
    m.mass[{Path{{0, 0, 1}}, 1}] = q(1, 5);
    m.mass[{Path{{0, 0, 0}}, 1}] = q(1, 5);
    m.mass[{Path{{0, 0, 2}}, 2}] = q(1, 40);
    m.mass[{Path{{0, 0, 0}}, 2}] = q(3, 40);
    m.mass[{Path{{0, 1, 2}}, 2}] = q(3, 8);
    m.mass[{Path{{0, 1, 0}}, 2}] = q(1, 8);
    const auto report = verify_certificate(p, m, q(18, 5));
    c.require(report.ok(), "transcribed mixture certificate");
    for (const auto& f : certs.failures) {
        c.require(false, f);
    }
    c.detail << " " << certs.checked << " emitted certificates re-verified, "
             << certs.failures.size() << " failures; mixture certificate "
             << (report.ok() ? "verifies" : "fails") << " at 18/5";
    print(6, "certificate integrity", c, seconds_since(t0));
}

void criterion_7() {
    Criterion c;
    const auto t0 = Clock::now();
    std::mt19937_64 g(2024);
    auto draw = [&](std::size_t n) {
        std::vector<Rational> beta(n);
        for (auto& b : beta) {
            b = q(static_cast<long>(g() % 81) - 40, static_cast<long>(1 + g() % 4));
        }
        return beta;
    };
    std::vector<Problem> problems{testing::example_problem(), testing::example_problem_single_instrument()};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        problems.push_back(testing::random_instance(seed));
    }
    std::size_t triples = 0;
    for (const Problem& p : problems) {
        const auto instruments = calibration_instruments(p);
        const std::size_t n = instruments.size();
        for (int k = 0; k < 10; ++k) {
            const auto a = draw(n);
            const auto b = draw(n);
            std::vector<Rational> mid(n);
            for (std::size_t i = 0; i < n; ++i) {
                mid[i] = (a[i] + b[i]) / 2;
            }
            const auto ha = robust_penalized_value(p, instruments, a);
            const auto hb = robust_penalized_value(p, instruments, b);
            const auto hm = robust_penalized_value(p, instruments, mid);
            c.require(2 * hm.value <= ha.value + hb.value, "midpoint convexity");
            Rational support = ha.value;
            for (std::size_t i = 0; i < n; ++i) {
                support += ha.subgradient[i] * (b[i] - a[i]);
            }
            c.require(hb.value >= support, "subgradient inequality");
            ++triples;
        }
    }
    c.detail << " " << triples << " random triples on " << problems.size() << " problems";
    print(7, "convexity and subgradient", c, seconds_since(t0));
}

}  // namespace

int main() {
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criterion_5();
        criterion_6();
        criterion_7();
    } catch (const std::exception& e) {
        std::cout << "FAIL aborted: " << e.what() << "\n";
        return 1;
    }
    return failed == 0 ? 0 : 1;
}
