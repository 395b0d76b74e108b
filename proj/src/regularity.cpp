#include "varcheck/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace varcheck {

namespace {

constexpr double kConvexityTolerance = 1e-12;
constexpr double kEnvelopeSlack = 1e-12;
constexpr double kLeadingFloor = 1e-9;

double norm2(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = lo + (hi - lo) * i / (count - 1);
    return out;
}

// margin evaluators shared between the fit passes and recheck_margin so a
// stored witness re-evaluates bit-identically

double superlinearity_margin(const LagrangianExpr& L, const EvalPoint& p, double a, double b) {
    const Partials d = L.partials(p);
    std::vector<double> w = p.xdd;
    return norm2(d.dxdd) - (a * norm2(w) + b);
}

double quadratic_margin(const LagrangianExpr& L, const EvalPoint& p, double a, double b) {
    const Partials d = L.partials(p);
    const double wn = norm2(p.xdd);
    return norm2(d.dxdd) - (a * wn * wn + b);
}

double convexity_margin(const LagrangianExpr& L, const EvalPoint& p1, const EvalPoint& p2) {
    EvalPoint mid = p1;
    for (std::size_t i = 0; i < mid.xdd.size(); ++i)
        mid.xdd[i] = 0.5 * p1.xdd[i] + 0.5 * p2.xdd[i];
    return 0.5 * L.eval(p1) + 0.5 * L.eval(p2) + kConvexityTolerance - L.eval(mid);
}

double tonelli_morrey_margin(const LagrangianExpr& L, const EvalPoint& p, double c, double r) {
    const Partials d = L.partials(p);
    const double lhs = norm2(d.dx) + norm2(d.dxd);
    return c * std::abs(L.eval(p)) + r - lhs;
}

double autonomy_margin(const LagrangianExpr& L, const EvalPoint& p, double c, double k) {
    const Partials d = L.partials(p);
    return c * std::abs(L.eval(p)) + k - std::abs(d.dt);
}

double sarychev_torres_margin(const LagrangianExpr& L, const EvalPoint& p, double beta, double mu,
                              double gamma, double eta) {
    const Partials d = L.partials(p);
    const double lhs = (std::abs(d.dt) + norm2(d.dx)) * std::pow(norm2(p.xd), mu);
    return gamma * std::pow(L.eval(p), beta) + eta - lhs;
}

// lhs <= lead*basis + offset fitted by a joint envelope pass then a residual
// pass; offset is bumped until the minimum slack is nonnegative in floating
// point. Values are per-sample (lhs, basis).
struct EnvelopeFit {
    double lead = 0.0;
    double offset = 0.0;
};

EnvelopeFit fit_envelope(const std::vector<double>& lhs, const std::vector<double>& basis) {
    double rho = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i)
        if (basis[i] > 0.0) rho = std::max(rho, lhs[i] / (1.0 + basis[i]));
        else rho = std::max(rho, lhs[i]);
    EnvelopeFit fit;
    fit.lead = std::max(rho * (1.0 + kEnvelopeSlack), kLeadingFloor);
    double residual = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lhs.size(); ++i)
        residual = std::max(residual, lhs[i] - fit.lead * basis[i]);
    fit.offset = std::max(residual, 0.0);
    return fit;
}

struct SampleSet {
    std::vector<EvalPoint> points;
    std::size_t skipped = 0;
};

}  // namespace

std::string verdict_name(Verdict v) {
    return v == Verdict::HoldsOnSamples ? "holds-on-samples" : "violated";
}

double Certificate::constant(const std::string& name) const {
    for (const auto& [key, value] : constants)
        if (key == name) return value;
    throw std::out_of_range("certificate has no constant named " + name);
}

std::vector<EvalPoint> make_samples(const SampleDomain& dom, int n) {
    if (dom.grid < 2) throw std::invalid_argument("grid counts must be >= 2");
    const int axes = 1 + 3 * n;
    double total = 1.0;
    for (int i = 0; i < axes; ++i) total *= dom.grid;
    if (total > 2e6) throw std::invalid_argument("tensor grid too large; reduce grid counts");

    std::vector<std::vector<double>> axis_values;
    axis_values.push_back(linspace(dom.t_lo, dom.t_hi, dom.grid));
    for (int i = 0; i < n; ++i) axis_values.push_back(linspace(dom.x_lo, dom.x_hi, dom.grid));
    for (int i = 0; i < n; ++i) axis_values.push_back(linspace(dom.xd_lo, dom.xd_hi, dom.grid));
    for (int i = 0; i < n; ++i) axis_values.push_back(linspace(dom.xdd_lo, dom.xdd_hi, dom.grid));

    std::vector<EvalPoint> out;
    out.reserve(static_cast<std::size_t>(total) + dom.random_count + 2 * n + 1);
    std::vector<int> idx(axes, 0);
    for (;;) {
        EvalPoint p;
        p.t = axis_values[0][idx[0]];
        p.x.resize(n);
        p.xd.resize(n);
        p.xdd.resize(n);
        for (int i = 0; i < n; ++i) p.x[i] = axis_values[1 + i][idx[1 + i]];
        for (int i = 0; i < n; ++i) p.xd[i] = axis_values[1 + n + i][idx[1 + n + i]];
        for (int i = 0; i < n; ++i) p.xdd[i] = axis_values[1 + 2 * n + i][idx[1 + 2 * n + i]];
        out.push_back(std::move(p));
        int axis = axes - 1;
        while (axis >= 0 && ++idx[axis] == dom.grid) idx[axis--] = 0;
        if (axis < 0) break;
    }

    std::mt19937_64 rng(dom.rng_seed);
    std::uniform_real_distribution<double> ut(dom.t_lo, dom.t_hi);
    std::uniform_real_distribution<double> ux(dom.x_lo, dom.x_hi);
    std::uniform_real_distribution<double> uxd(dom.xd_lo, dom.xd_hi);
    std::uniform_real_distribution<double> uxdd(dom.xdd_lo, dom.xdd_hi);
    for (int k = 0; k < dom.random_count; ++k) {
        EvalPoint p;
        p.t = ut(rng);
        p.x.resize(n);
        p.xd.resize(n);
        p.xdd.resize(n);
        for (int i = 0; i < n; ++i) p.x[i] = ux(rng);
        for (int i = 0; i < n; ++i) p.xd[i] = uxd(rng);
        for (int i = 0; i < n; ++i) p.xdd[i] = uxdd(rng);
        out.push_back(std::move(p));
    }

    // forced special points: the decisive witnesses sit at xdd = 0 (when the
    // box contains it) and at the axis extremes
    const double w_rest = std::clamp(0.0, dom.xdd_lo, dom.xdd_hi);
    EvalPoint mid;
    mid.t = 0.5 * (dom.t_lo + dom.t_hi);
    mid.x.assign(n, 0.5 * (dom.x_lo + dom.x_hi));
    mid.xd.assign(n, 0.5 * (dom.xd_lo + dom.xd_hi));
    mid.xdd.assign(n, w_rest);
    out.push_back(mid);
    for (int i = 0; i < n; ++i) {
        EvalPoint lo = mid;
        lo.xdd.assign(n, w_rest);
        lo.xdd[i] = dom.xdd_lo;
        out.push_back(lo);
        EvalPoint hi = mid;
        hi.xdd.assign(n, w_rest);
        hi.xdd[i] = dom.xdd_hi;
        out.push_back(hi);
    }
    return out;
}

namespace {

Certificate check_growth_bound(const LagrangianExpr& L, const SampleDomain& dom, double b_min,
                               bool quadratic) {
    if (!L.declared_autonomous())
        throw std::invalid_argument("superlinearity checks require an autonomous Lagrangian");
    if (!(b_min > 0.0)) throw std::invalid_argument("b_min must be positive");

    Certificate cert;
    cert.kind = quadratic ? "quadratic-coercivity" : "superlinearity";
    cert.rng_seed = dom.rng_seed;

    auto margin_fn = quadratic ? quadratic_margin : superlinearity_margin;
    std::vector<EvalPoint> samples = make_samples(dom, L.dimension());
    std::vector<const EvalPoint*> usable;
    usable.reserve(samples.size());
    for (const auto& p : samples) {
        try {
            (void)L.partials(p);
            usable.push_back(&p);
        } catch (const EvalDomainError&) {
            ++cert.skipped_samples;
        }
    }
    cert.sample_count = usable.size();

    // feasibility of the offset alone: with a = 0 the inequality reads
    // b_min <= |dL/dxdd|
    double worst = std::numeric_limits<double>::infinity();
    const EvalPoint* worst_pt = nullptr;
    for (const EvalPoint* p : usable) {
        const double m = margin_fn(L, *p, 0.0, b_min);
        if (m < worst) {
            worst = m;
            worst_pt = p;
        }
    }
    if (worst < 0.0) {
        cert.verdict = Verdict::Violated;
        cert.constants = {{"a", 0.0}, {"b", b_min}};
        cert.witness = *worst_pt;
        cert.margin = worst;
        return cert;
    }

    double a_raw = std::numeric_limits<double>::infinity();
    for (const EvalPoint* p : usable) {
        double wn = norm2(p->xdd);
        if (quadratic) wn *= wn;
        if (wn > 0.0) {
            const Partials d = L.partials(*p);
            a_raw = std::min(a_raw, (norm2(d.dxdd) - b_min) / wn);
        }
    }
    if (!std::isfinite(a_raw)) a_raw = 1.0;  // no nonzero-w samples: any a works
    if (a_raw <= 0.0) {
        // equality g = b_min at some w != 0: no strictly positive slope fits
        const double a_eps = std::numeric_limits<double>::min();
        double m = 0.0;
        const EvalPoint* pt = nullptr;
        for (const EvalPoint* p : usable) {
            const double cand = margin_fn(L, *p, a_eps, b_min);
            if (pt == nullptr || cand < m) {
                m = cand;
                pt = p;
            }
        }
        cert.verdict = Verdict::Violated;
        cert.constants = {{"a", a_eps}, {"b", b_min}};
        cert.witness = *pt;
        cert.margin = m;
        return cert;
    }

    const double a_fit = a_raw * (1.0 - kEnvelopeSlack);
    double margin = std::numeric_limits<double>::infinity();
    for (const EvalPoint* p : usable) margin = std::min(margin, margin_fn(L, *p, a_fit, b_min));
    cert.verdict = Verdict::HoldsOnSamples;
    cert.constants = {{"a", a_fit}, {"b", b_min}};
    cert.margin = margin;
    return cert;
}

}  // namespace

Certificate check_superlinearity(const LagrangianExpr& L, const SampleDomain& dom, double b_min) {
    return check_growth_bound(L, dom, b_min, false);
}

Certificate check_quadratic_coercivity(const LagrangianExpr& L, const SampleDomain& dom,
                                       double b_min) {
    return check_growth_bound(L, dom, b_min, true);
}

Certificate check_convexity_last_arg(const LagrangianExpr& L, const SampleDomain& dom) {
    const int n = L.dimension();
    Certificate cert;
    cert.kind = "convexity-last-arg";
    cert.rng_seed = dom.rng_seed;

    // bases: a coarse tensor grid over (t, x, xd) plus the box midpoint
    const int base_grid = std::min(dom.grid, 3);
    std::vector<EvalPoint> bases;
    for (double t : linspace(dom.t_lo, dom.t_hi, base_grid))
        for (double x : linspace(dom.x_lo, dom.x_hi, base_grid))
            for (double xd : linspace(dom.xd_lo, dom.xd_hi, base_grid)) {
                EvalPoint p;
                p.t = t;
                p.x.assign(n, x);
                p.xd.assign(n, xd);
                p.xdd.assign(n, 0.0);
                bases.push_back(p);
            }

    // w candidates: per-axis grid plus seeded random vectors
    std::vector<std::vector<double>> ws;
    for (double w : linspace(dom.xdd_lo, dom.xdd_hi, dom.grid)) {
        std::vector<double> v(n, 0.0);
        v[0] = w;
        ws.push_back(v);
    }
    std::mt19937_64 rng(dom.rng_seed);
    std::uniform_real_distribution<double> uw(dom.xdd_lo, dom.xdd_hi);
    for (int k = 0; k < std::max(4, dom.random_count / 4); ++k) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = uw(rng);
        ws.push_back(v);
    }

    double worst = std::numeric_limits<double>::infinity();
    EvalPoint worst_a, worst_b;
    std::size_t counted = 0;
    for (const auto& base : bases) {
        for (std::size_t i = 0; i < ws.size(); ++i) {
            for (std::size_t j = i + 1; j < ws.size(); ++j) {
                EvalPoint p1 = base;
                p1.xdd = ws[i];
                EvalPoint p2 = base;
                p2.xdd = ws[j];
                double m;
                try {
                    m = convexity_margin(L, p1, p2);
                } catch (const EvalDomainError&) {
                    ++cert.skipped_samples;
                    continue;
                }
                ++counted;
                if (m < worst) {
                    worst = m;
                    worst_a = p1;
                    worst_b = p2;
                }
            }
        }
    }
    cert.sample_count = counted;
    cert.margin = worst;
    if (worst < 0.0) {
        cert.verdict = Verdict::Violated;
        cert.witness = worst_a;
        cert.witness_b = worst_b;
    } else {
        cert.verdict = Verdict::HoldsOnSamples;
    }
    cert.constants = {{"tolerance", kConvexityTolerance}};
    return cert;
}

CoercivityTable check_coercivity(const LagrangianExpr& L, const SampleDomain& dom,
                                 const std::vector<double>& radii) {
    if (radii.empty()) throw std::invalid_argument("coercivity needs at least one radius");
    const int n = L.dimension();
    CoercivityTable table;
    table.radii = radii;

    const int base_grid = std::min(dom.grid, 3);
    std::vector<EvalPoint> bases;
    for (double t : linspace(dom.t_lo, dom.t_hi, base_grid))
        for (double x : linspace(dom.x_lo, dom.x_hi, base_grid))
            for (double xd : linspace(dom.xd_lo, dom.xd_hi, base_grid)) {
                EvalPoint p;
                p.t = t;
                p.x.assign(n, x);
                p.xd.assign(n, xd);
                p.xdd.assign(n, 0.0);
                bases.push_back(p);
            }

    // shell directions: the coordinate axes plus seeded random unit vectors
    std::vector<std::vector<double>> dirs;
    for (int i = 0; i < n; ++i) {
        std::vector<double> d(n, 0.0);
        d[i] = 1.0;
        dirs.push_back(d);
        d[i] = -1.0;
        dirs.push_back(d);
    }
    std::mt19937_64 rng(dom.rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < 4 * n; ++k) {
        std::vector<double> d(n);
        double nrm = 0.0;
        for (int i = 0; i < n; ++i) {
            d[i] = gauss(rng);
            nrm += d[i] * d[i];
        }
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) continue;
        for (double& v : d) v /= nrm;
        dirs.push_back(d);
    }

    for (double r : radii) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& base : bases) {
            for (const auto& dir : dirs) {
                EvalPoint p = base;
                for (int i = 0; i < n; ++i) p.xdd[i] = r * dir[i];
                try {
                    best = std::min(best, L.eval(p));
                } catch (const EvalDomainError&) {
                }
            }
        }
        table.theta_hat.push_back(best);
    }

    table.superlinear = true;
    const std::size_t m = radii.size();
    if (m < 3) {
        table.superlinear = false;
    } else {
        for (std::size_t i = m - 2; i < m; ++i) {
            const double prev = table.theta_hat[i - 1] / table.radii[i - 1];
            const double cur = table.theta_hat[i] / table.radii[i];
            if (!(cur > prev)) table.superlinear = false;
        }
    }
    return table;
}

namespace {

Certificate envelope_certificate(const LagrangianExpr& L, const SampleDomain& dom,
                                 const std::string& kind,
                                 const std::function<double(const EvalPoint&)>& lhs_fn,
                                 const std::function<double(const EvalPoint&)>& basis_fn,
                                 const std::function<double(const EvalPoint&, double, double)>&
                                     margin_fn,
                                 const char* lead_name, const char* offset_name) {
    Certificate cert;
    cert.kind = kind;
    cert.rng_seed = dom.rng_seed;

    std::vector<EvalPoint> samples = make_samples(dom, L.dimension());
    std::vector<const EvalPoint*> usable;
    std::vector<double> lhs, basis;
    for (const auto& p : samples) {
        try {
            const double l = lhs_fn(p);
            const double b = basis_fn(p);
            if (!std::isfinite(l) || !std::isfinite(b)) {
                ++cert.skipped_samples;
                continue;
            }
            lhs.push_back(l);
            basis.push_back(b);
            usable.push_back(&p);
        } catch (const EvalDomainError&) {
            ++cert.skipped_samples;
        }
    }
    cert.sample_count = usable.size();
    if (usable.empty()) {
        cert.verdict = Verdict::Violated;
        cert.margin = -std::numeric_limits<double>::infinity();
        cert.constants = {{lead_name, 0.0}, {offset_name, 0.0}};
        return cert;
    }

    EnvelopeFit fit = fit_envelope(lhs, basis);
    double margin = std::numeric_limits<double>::infinity();
    for (int bump = 0; bump < 8; ++bump) {
        margin = std::numeric_limits<double>::infinity();
        for (const EvalPoint* p : usable)
            margin = std::min(margin, margin_fn(*p, fit.lead, fit.offset));
        if (margin >= 0.0) break;
        fit.offset += std::max(1e-15 * (1.0 + std::abs(fit.offset)), -2.0 * margin);
    }
    cert.verdict = margin >= 0.0 ? Verdict::HoldsOnSamples : Verdict::Violated;
    cert.constants = {{lead_name, fit.lead}, {offset_name, fit.offset}};
    cert.margin = margin;
    return cert;
}

}  // namespace

Certificate check_tonelli_morrey(const LagrangianExpr& L, const SampleDomain& dom) {
    return envelope_certificate(
        L, dom, "tonelli-morrey",
        [&](const EvalPoint& p) {
            const Partials d = L.partials(p);
            return norm2(d.dx) + norm2(d.dxd);
        },
        [&](const EvalPoint& p) { return std::abs(L.eval(p)); },
        [&](const EvalPoint& p, double c, double r) { return tonelli_morrey_margin(L, p, c, r); },
        "c", "r");
}

Certificate check_autonomy_condition(const LagrangianExpr& L, const SampleDomain& dom) {
    if (L.declared_autonomous()) {
        Certificate cert;
        cert.kind = "clarke-vinter-autonomy";
        cert.rng_seed = dom.rng_seed;
        std::vector<EvalPoint> samples = make_samples(dom, L.dimension());
        double margin = std::numeric_limits<double>::infinity();
        std::size_t counted = 0;
        for (const auto& p : samples) {
            try {
                margin = std::min(margin, autonomy_margin(L, p, 0.0, 0.0));
                ++counted;
            } catch (const EvalDomainError&) {
                ++cert.skipped_samples;
            }
        }
        cert.sample_count = counted;
        cert.verdict = Verdict::HoldsOnSamples;
        cert.constants = {{"c", 0.0}, {"k", 0.0}};
        cert.margin = counted == 0 ? 0.0 : margin;
        return cert;
    }
    return envelope_certificate(
        L, dom, "clarke-vinter-autonomy",
        [&](const EvalPoint& p) { return std::abs(L.partials(p).dt); },
        [&](const EvalPoint& p) { return std::abs(L.eval(p)); },
        [&](const EvalPoint& p, double c, double k) { return autonomy_margin(L, p, c, k); },
        "c", "k");
}

Certificate check_sarychev_torres(const LagrangianExpr& L, const SampleDomain& dom, double beta,
                                  double mu) {
    if (!(beta < 2.0)) throw std::invalid_argument("sarychev-torres requires beta < 2");
    if (!(mu >= std::max(beta - 1.0, -1.0)))
        throw std::invalid_argument("sarychev-torres requires mu >= max(beta-1, -1)");
    const bool integral_beta = std::floor(beta) == beta;
    Certificate cert = envelope_certificate(
        L, dom, "sarychev-torres",
        [&](const EvalPoint& p) {
            const double Lval = L.eval(p);
            if (!integral_beta && Lval < 0.0)
                throw std::domain_error(
                    "sarychev-torres with non-integer beta requires L >= 0 on samples");
            const Partials d = L.partials(p);
            return (std::abs(d.dt) + norm2(d.dx)) * std::pow(norm2(p.xd), mu);
        },
        [&](const EvalPoint& p) { return std::pow(L.eval(p), beta); },
        [&](const EvalPoint& p, double gamma, double eta) {
            return sarychev_torres_margin(L, p, beta, mu, gamma, eta);
        },
        "gamma", "eta");
    cert.constants.push_back({"beta", beta});
    cert.constants.push_back({"mu", mu});
    return cert;
}

double recheck_margin(const LagrangianExpr& L, const Certificate& cert) {
    if (!cert.witness) throw std::invalid_argument("certificate has no witness to re-check");
    const EvalPoint& w = *cert.witness;
    if (cert.kind == "superlinearity")
        return superlinearity_margin(L, w, cert.constant("a"), cert.constant("b"));
    if (cert.kind == "quadratic-coercivity")
        return quadratic_margin(L, w, cert.constant("a"), cert.constant("b"));
    if (cert.kind == "convexity-last-arg") {
        if (!cert.witness_b) throw std::invalid_argument("convexity witness pair incomplete");
        return convexity_margin(L, w, *cert.witness_b);
    }
    if (cert.kind == "tonelli-morrey")
        return tonelli_morrey_margin(L, w, cert.constant("c"), cert.constant("r"));
    if (cert.kind == "clarke-vinter-autonomy")
        return autonomy_margin(L, w, cert.constant("c"), cert.constant("k"));
    if (cert.kind == "sarychev-torres")
        return sarychev_torres_margin(L, w, cert.constant("beta"), cert.constant("mu"),
                                      cert.constant("gamma"), cert.constant("eta"));
    throw std::invalid_argument("unknown certificate kind: " + cert.kind);
}

namespace {

nlohmann::ordered_json point_json(const EvalPoint& p) {
    return {{"t", p.t}, {"x", p.x}, {"xd", p.xd}, {"xdd", p.xdd}};
}

}  // namespace

std::string certificate_json(const Certificate& cert) {
    nlohmann::ordered_json j;
    j["kind"] = cert.kind;
    j["verdict"] = verdict_name(cert.verdict);
    nlohmann::ordered_json constants;
    for (const auto& [name, value] : cert.constants) constants[name] = value;
    j["constants"] = constants;
    j["witness"] = cert.witness ? point_json(*cert.witness) : nlohmann::ordered_json(nullptr);
    if (cert.witness_b) j["witness_b"] = point_json(*cert.witness_b);
    j["margin"] = cert.margin;
    j["sample_count"] = cert.sample_count;
    j["skipped_samples"] = cert.skipped_samples;
    j["rng_seed"] = cert.rng_seed;
    return j.dump(2);
}

std::string coercivity_json(const CoercivityTable& table) {
    nlohmann::ordered_json j;
    j["kind"] = "coercivity-growth";
    j["radii"] = table.radii;
    j["theta_hat"] = table.theta_hat;
    std::vector<double> ratios;
    for (std::size_t i = 0; i < table.radii.size(); ++i)
        ratios.push_back(table.theta_hat[i] / table.radii[i]);
    j["theta_over_r"] = ratios;
    j["verdict"] = table.superlinear ? "superlinear-on-samples" : "not-superlinear-on-samples";
    return j.dump(2);
}

}  // namespace varcheck
