#include "varcheck/problem_file.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace varcheck {

namespace {

std::string trim(const std::string& s) {
    const auto from = s.find_first_not_of(" \t\r");
    if (from == std::string::npos) return "";
    const auto to = s.find_last_not_of(" \t\r");
    return s.substr(from, to - from + 1);
}

std::string format17(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return std::string(buf.data());
}

double parse_real(const std::string& value, int line) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || trim(end) != "")
        throw ProblemFileError("malformed number '" + value + "'", line);
    return v;
}

long parse_int(const std::string& value, int line) {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (end == value.c_str() || trim(end) != "")
        throw ProblemFileError("malformed integer '" + value + "'", line);
    return v;
}

std::vector<double> parse_vector(const std::string& value, int line) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(parse_real(trim(cell), line));
    if (out.empty()) throw ProblemFileError("empty vector value", line);
    return out;
}

struct RawEntry {
    std::string value;
    int line;
};

using Section = std::map<std::string, RawEntry>;

}  // namespace

ProblemFile parse_problem_file(const std::string& text) {
    std::map<std::string, Section> sections;
    {
        std::stringstream ss(text);
        std::string line;
        std::string current;
        int lineno = 0;
        while (std::getline(ss, line)) {
            ++lineno;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']') throw ProblemFileError("malformed section header", lineno);
                current = t.substr(1, t.size() - 2);
                if (current != "problem" && current != "solver" && current != "domain" &&
                    current != "lavrentiev")
                    throw ProblemFileError("unknown section [" + current + "]", lineno);
                sections[current];
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ProblemFileError("expected key = value", lineno);
            if (current.empty())
                throw ProblemFileError("key outside of any section", lineno);
            const std::string key = trim(t.substr(0, eq));
            if (key.empty()) throw ProblemFileError("empty key", lineno);
            if (sections[current].count(key))
                throw ProblemFileError("duplicate key '" + key + "'", lineno);
            sections[current][key] = {trim(t.substr(eq + 1)), lineno};
        }
    }
    if (!sections.count("problem")) throw ProblemFileError("missing [problem] section", 0);

    ProblemFile pf;
    auto take = [](Section& sec, const char* key) -> RawEntry* {
        auto it = sec.find(key);
        return it == sec.end() ? nullptr : &it->second;
    };
    auto finish_section = [](const Section& sec, const std::vector<std::string>& known,
                             const char* name) {
        for (const auto& [key, entry] : sec)
            if (std::find(known.begin(), known.end(), key) == known.end())
                throw ProblemFileError(std::string("unknown key '") + key + "' in [" + name + "]",
                                       entry.line);
    };

    // [problem]
    {
        Section& sec = sections["problem"];
        const std::vector<std::string> known = {"a", "b", "n", "lagrangian",
                                                "x_a", "x_b", "xd_a", "xd_b"};
        finish_section(sec, known, "problem");
        for (const char* key : {"a", "b", "n", "lagrangian", "x_a", "x_b", "xd_a", "xd_b"})
            if (!take(sec, key))
                throw ProblemFileError(std::string("missing key '") + key + "' in [problem]", 0);
        pf.problem.a = parse_real(sec["a"].value, sec["a"].line);
        pf.problem.b = parse_real(sec["b"].value, sec["b"].line);
        if (!(pf.problem.b > pf.problem.a))
            throw ProblemFileError("b must exceed a", sec["b"].line);
        const long n = parse_int(sec["n"].value, sec["n"].line);
        if (n < 1) throw ProblemFileError("n must be positive", sec["n"].line);
        pf.problem.n = static_cast<int>(n);
        try {
            pf.problem.lagrangian =
                LagrangianExpr::parse(sec["lagrangian"].value, pf.problem.n);
        } catch (const ParseError& err) {
            throw ProblemFileError(std::string("bad lagrangian: ") + err.what(),
                                   sec["lagrangian"].line);
        }
        auto bc_vec = [&](const char* key) {
            auto v = parse_vector(sec[key].value, sec[key].line);
            if (static_cast<int>(v.size()) != pf.problem.n)
                throw ProblemFileError(std::string("boundary vector '") + key + "' must have " +
                                           std::to_string(pf.problem.n) + " components",
                                       sec[key].line);
            for (double x : v)
                if (!std::isfinite(x))
                    throw ProblemFileError(std::string("non-finite boundary value in '") + key +
                                               "'",
                                           sec[key].line);
            return v;
        };
        pf.problem.bc.x_a = bc_vec("x_a");
        pf.problem.bc.x_b = bc_vec("x_b");
        pf.problem.bc.xd_a = bc_vec("xd_a");
        pf.problem.bc.xd_b = bc_vec("xd_b");
    }

    // [solver]
    pf.solver.initial_mesh = 64;
    if (sections.count("solver")) {
        Section& sec = sections["solver"];
        const std::vector<std::string> known = {"mesh", "refinements", "grad_tol", "max_iters",
                                                "quad_order"};
        finish_section(sec, known, "solver");
        if (auto* e = take(sec, "mesh")) pf.solver.initial_mesh = (int)parse_int(e->value, e->line);
        if (auto* e = take(sec, "refinements"))
            pf.solver.refinements = (int)parse_int(e->value, e->line);
        if (auto* e = take(sec, "grad_tol")) pf.solver.grad_tol = parse_real(e->value, e->line);
        if (auto* e = take(sec, "max_iters")) pf.solver.max_iters = (int)parse_int(e->value, e->line);
        if (auto* e = take(sec, "quad_order")) {
            pf.solver.quad_order = (int)parse_int(e->value, e->line);
            if (pf.solver.quad_order != 3 && pf.solver.quad_order != 5 &&
                pf.solver.quad_order != 7)
                throw ProblemFileError("quad_order must be 3, 5 or 7", e->line);
        }
        if (pf.solver.initial_mesh < 1)
            throw ProblemFileError("mesh must be positive", sec.count("mesh") ? sec["mesh"].line : 0);
        if (!(pf.solver.grad_tol > 0.0))
            throw ProblemFileError("grad_tol must be positive",
                                   sec.count("grad_tol") ? sec["grad_tol"].line : 0);
        if (pf.solver.refinements < 0)
            throw ProblemFileError("refinements must be >= 0",
                                   sec.count("refinements") ? sec["refinements"].line : 0);
    }

    // [domain]
    if (sections.count("domain")) {
        Section& sec = sections["domain"];
        const std::vector<std::string> known = {
            "t_min", "t_max", "x_min", "x_max", "xd_min", "xd_max", "xdd_min", "xdd_max",
            "grid", "random", "b_min", "radii", "st_beta", "st_mu"};
        finish_section(sec, known, "domain");
        if (auto* e = take(sec, "t_min")) pf.domain.t_lo = parse_real(e->value, e->line);
        if (auto* e = take(sec, "t_max")) pf.domain.t_hi = parse_real(e->value, e->line);
        if (auto* e = take(sec, "x_min")) pf.domain.x_lo = parse_real(e->value, e->line);
        if (auto* e = take(sec, "x_max")) pf.domain.x_hi = parse_real(e->value, e->line);
        if (auto* e = take(sec, "xd_min")) pf.domain.xd_lo = parse_real(e->value, e->line);
        if (auto* e = take(sec, "xd_max")) pf.domain.xd_hi = parse_real(e->value, e->line);
        if (auto* e = take(sec, "xdd_min")) pf.domain.xdd_lo = parse_real(e->value, e->line);
        if (auto* e = take(sec, "xdd_max")) pf.domain.xdd_hi = parse_real(e->value, e->line);
        if (auto* e = take(sec, "grid")) pf.domain.grid = (int)parse_int(e->value, e->line);
        if (auto* e = take(sec, "random")) pf.domain.random_count = (int)parse_int(e->value, e->line);
        if (auto* e = take(sec, "b_min")) pf.b_min = parse_real(e->value, e->line);
        if (auto* e = take(sec, "radii")) {
            pf.radii = parse_vector(e->value, e->line);
            for (std::size_t i = 1; i < pf.radii.size(); ++i)
                if (!(pf.radii[i] > pf.radii[i - 1]))
                    throw ProblemFileError("radii must be strictly increasing", e->line);
        }
        if (auto* e = take(sec, "st_beta")) pf.st_beta = parse_real(e->value, e->line);
        if (auto* e = take(sec, "st_mu")) pf.st_mu = parse_real(e->value, e->line);
        auto check_box = [&](double lo, double hi, const char* what) {
            if (!(lo < hi))
                throw ProblemFileError(std::string("empty box for ") + what, 0);
        };
        check_box(pf.domain.t_lo, pf.domain.t_hi, "t");
        check_box(pf.domain.x_lo, pf.domain.x_hi, "x");
        check_box(pf.domain.xd_lo, pf.domain.xd_hi, "xd");
        check_box(pf.domain.xdd_lo, pf.domain.xdd_hi, "xdd");
        if (pf.domain.grid < 2) throw ProblemFileError("grid must be >= 2", 0);
        if (pf.domain.random_count < 0) throw ProblemFileError("random must be >= 0", 0);
        if (!(pf.b_min > 0.0)) throw ProblemFileError("b_min must be positive", 0);
    }

    // [lavrentiev]
    if (sections.count("lavrentiev")) {
        Section& sec = sections["lavrentiev"];
        const std::vector<std::string> known = {"caps", "penalty_mu"};
        finish_section(sec, known, "lavrentiev");
        if (auto* e = take(sec, "caps")) {
            pf.caps = parse_vector(e->value, e->line);
            for (std::size_t i = 1; i < pf.caps.size(); ++i)
                if (!(pf.caps[i] > pf.caps[i - 1]))
                    throw ProblemFileError("caps must be strictly increasing", e->line);
        }
        if (auto* e = take(sec, "penalty_mu")) {
            pf.penalty_mu = parse_real(e->value, e->line);
            if (pf.penalty_mu < 0.0)
                throw ProblemFileError("penalty_mu must be nonnegative", e->line);
        }
    }
    return pf;
}

ProblemFile load_problem_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open problem file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_problem_file(ss.str());
}

std::string ProblemFile::canonical_text() const {
    auto vec = [](const std::vector<double>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ",";
            out += format17(v[i]);
        }
        return out;
    };
    std::string out;
    out += "[problem]\n";
    out += "a = " + format17(problem.a) + "\n";
    out += "b = " + format17(problem.b) + "\n";
    out += "n = " + std::to_string(problem.n) + "\n";
    out += "lagrangian = " + problem.lagrangian.to_string() + "\n";
    out += "x_a = " + vec(problem.bc.x_a) + "\n";
    out += "x_b = " + vec(problem.bc.x_b) + "\n";
    out += "xd_a = " + vec(problem.bc.xd_a) + "\n";
    out += "xd_b = " + vec(problem.bc.xd_b) + "\n";
    out += "\n[solver]\n";
    out += "mesh = " + std::to_string(solver.initial_mesh) + "\n";
    out += "refinements = " + std::to_string(solver.refinements) + "\n";
    out += "grad_tol = " + format17(solver.grad_tol) + "\n";
    out += "max_iters = " + std::to_string(solver.max_iters) + "\n";
    out += "quad_order = " + std::to_string(solver.quad_order) + "\n";
    out += "\n[domain]\n";
    out += "t_min = " + format17(domain.t_lo) + "\n";
    out += "t_max = " + format17(domain.t_hi) + "\n";
    out += "x_min = " + format17(domain.x_lo) + "\n";
    out += "x_max = " + format17(domain.x_hi) + "\n";
    out += "xd_min = " + format17(domain.xd_lo) + "\n";
    out += "xd_max = " + format17(domain.xd_hi) + "\n";
    out += "xdd_min = " + format17(domain.xdd_lo) + "\n";
    out += "xdd_max = " + format17(domain.xdd_hi) + "\n";
    out += "grid = " + std::to_string(domain.grid) + "\n";
    out += "random = " + std::to_string(domain.random_count) + "\n";
    out += "b_min = " + format17(b_min) + "\n";
    out += "radii = " + vec(radii) + "\n";
    out += "st_beta = " + format17(st_beta) + "\n";
    out += "st_mu = " + format17(st_mu) + "\n";
    out += "\n[lavrentiev]\n";
    out += "caps = " + vec(caps) + "\n";
    out += "penalty_mu = " + format17(penalty_mu) + "\n";
    return out;
}

std::string preset(const std::string& name) {
    auto base = [](const std::string& lagrangian, const std::string& x_b,
                   const std::string& xd_b) {
        std::string out;
        out += "[problem]\n";
        out += "a = 0\nb = 1\nn = 1\n";
        out += "lagrangian = " + lagrangian + "\n";
        out += "x_a = 0\nx_b = " + x_b + "\nxd_a = 0\nxd_b = " + xd_b + "\n";
        out += "\n[solver]\n";
        out += "mesh = 64\nrefinements = 0\ngrad_tol = 1e-8\nmax_iters = 2000\nquad_order = 5\n";
        out += "\n[domain]\n";
        out += "t_min = 0\nt_max = 1\nx_min = -1\nx_max = 1\nxd_min = -1\nxd_max = 1\n";
        out += "xdd_min = -2\nxdd_max = 2\ngrid = 5\nrandom = 32\nb_min = 0.001\n";
        out += "radii = 1,2,4,8\nst_beta = 1\nst_mu = 0\n";
        out += "\n[lavrentiev]\ncaps = 3,6,20\npenalty_mu = 1000\n";
        return out;
    };
    if (name == "quadratic") return base("pow(xdd1,2)", "1", "0");
    if (name == "quadratic-affine") return base("1*pow(xdd1,2)+2*xdd1", "1", "0");
    if (name == "zero") return base("pow(xdd1,2)", "0", "0");
    if (name == "cv90") {
        const double k = std::pow(0.6, 5.0 / 3.0);
        return base("pow(abs(pow(x1,2)-pow(xd1,5)),2)*pow(abs(xdd1),22)+0.01*pow(xdd1,2)",
                    format17(k), format17(5.0 * k / 3.0));
    }
    throw std::invalid_argument("unknown preset '" + name +
                                "' (expected quadratic, quadratic-affine, cv90 or zero)");
}

std::vector<std::string> preset_names() {
    return {"quadratic", "quadratic-affine", "cv90", "zero"};
}

}  // namespace varcheck
