#include "fracsplit/harness.hpp"

#include "fracsplit/error.hpp"

#include <toml.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace fracsplit {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double pi = std::numbers::pi;

int inverse_size(double h, const char* what)
{
    const double n = std::round(1.0 / h);
    if (!(h > 0.0) || n < 1.0 || std::abs(n * h - 1.0) > 1e-9)
        throw ConfigError(std::string(what) + ": mesh size must be 1/n");
    return static_cast<int>(n);
}

} // namespace

// ---------------------------------------------------------------- data

LoadSpec DataSpec::load() const
{
    if (kind == "none")
        return {};
    if (kind == "point") {
        auto s = LoadSpec::point({x0[0], x0[1]});
        s.weight = value;
        return s;
    }
    if (kind == "line") {
        auto s = LoadSpec::line({a[0], a[1]}, {b[0], b[1]});
        s.weight = value;
        return s;
    }
    if (kind == "sine") {
        const int kx = mode[0], ky = mode[1];
        const double v = value;
        return LoadSpec::density([=](Point p) { return v * std::sin(kx * pi * p.x) * std::sin(ky * pi * p.y); });
    }
    if (kind == "constant") {
        const double v = value;
        return LoadSpec::density([=](Point) { return v; });
    }
    throw ConfigError("unknown data kind '" + kind + "'");
}

TimeDerivs TimeFactorSpec::derivs() const
{
    const double v = value, c = rate;
    if (kind == "constant")
        return [v](int l, double) { return l == 0 ? v : 0.0; };
    if (kind == "linear")
        return [v](int l, double t) { return l == 0 ? v * t : (l == 1 ? v : 0.0); };
    if (kind == "exp")
        return [v, c](int l, double t) { return v * std::pow(-c, l) * std::exp(-c * t); };
    throw ConfigError("unknown time factor '" + kind + "'");
}

FracProblem StudyConfig::problem(double tau) const
{
    FracProblem p;
    p.alpha = alpha;
    p.T = T;
    p.m = m;
    p.k = k;
    p.tau = tau;
    p.initial = initial.load();
    p.cutoff_r0 = cutoff_r0;
    p.cutoff_r1 = cutoff_r1;
    if (source) {
        SourceSpec s;
        s.g = source_g.derivs();
        s.f = source_f.load();
        p.sources.push_back(std::move(s));
    }
    return p;
}

void StudyConfig::validate() const
{
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("alpha must lie in (0,1]");
    if (!(T > 0.0))
        throw ConfigError("T must be positive");
    if (m < 0)
        throw ConfigError("m must be non-negative");
    if (r < 1 || r > 5)
        throw ConfigError("r must lie in 1..5");
    if (k < 1 || k > 6)
        throw ConfigError("k must lie in 1..6");
    if (kind != "space" && kind != "time")
        throw ConfigError("study kind must be 'space' or 'time'");
    if (solver != "direct" && solver != "cg")
        throw ConfigError("solver must be 'direct' or 'cg'");
    if (threads < 1)
        throw ConfigError("threads must be positive");
    parse_strategy(strategy);
    initial.load();
    if (source) {
        source_f.load();
        source_g.derivs();
    }
    inverse_size(h_ref, "h_ref");
    if (!(tau_ref > 0.0))
        throw ConfigError("tau_ref must be positive");
    if (!(cutoff_r0 > 0.0 && cutoff_r1 > cutoff_r0))
        throw ConfigError("need 0 < cutoff_r0 < cutoff_r1");
}

// ---------------------------------------------------------------- TOML

namespace {

void check_keys(const toml::table& t, const std::string& where, const std::set<std::string>& allowed)
{
    for (const auto& kv : t) {
        const auto& key = kv.first;
        if (!allowed.count(std::string(key.str())))
            throw ConfigError("unknown key '" + std::string(key.str()) + "' in [" + where + "]");
    }
}

template <class T>
void get(const toml::table& t, const char* key, T& out)
{
    const toml::node* n = t.get(key);
    if (!n)
        return;
    if constexpr (std::is_same_v<T, double>) {
        if (auto v = n->value<double>())
            out = *v;
        else
            throw ConfigError(std::string("'") + key + "' must be a number");
    } else if constexpr (std::is_same_v<T, int>) {
        if (auto v = n->value<int64_t>())
            out = static_cast<int>(*v);
        else
            throw ConfigError(std::string("'") + key + "' must be an integer");
    } else if constexpr (std::is_same_v<T, bool>) {
        if (auto v = n->value<bool>())
            out = *v;
        else
            throw ConfigError(std::string("'") + key + "' must be a boolean");
    } else {
        if (auto v = n->value<std::string>())
            out = *v;
        else
            throw ConfigError(std::string("'") + key + "' must be a string");
    }
}

template <class T, std::size_t N>
void get_array(const toml::table& t, const char* key, std::array<T, N>& out)
{
    const toml::node* n = t.get(key);
    if (!n)
        return;
    const toml::array* a = n->as_array();
    if (!a || a->size() != N)
        throw ConfigError(std::string("'") + key + "' must be an array of " + std::to_string(N) + " numbers");
    for (std::size_t i = 0; i < N; ++i) {
        auto v = (*a)[i].value<T>();
        if (!v)
            throw ConfigError(std::string("'") + key + "' has a non-numeric entry");
        out[i] = *v;
    }
}

void get_data(const toml::table& parent, const char* key, DataSpec& d)
{
    const toml::node* n = parent.get(key);
    if (!n)
        return;
    const toml::table* t = n->as_table();
    if (!t)
        throw ConfigError(std::string("'") + key + "' must be a table");
    check_keys(*t, key, {"kind", "x0", "a", "b", "mode", "value"});
    get(*t, "kind", d.kind);
    get_array(*t, "x0", d.x0);
    get_array(*t, "a", d.a);
    get_array(*t, "b", d.b);
    get_array(*t, "mode", d.mode);
    get(*t, "value", d.value);
}

} // namespace

StudyConfig parse_config(const std::string& text)
{
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        throw ParseError(std::string("config: ") + std::string(e.description()), e.source().begin.line);
    }
    StudyConfig c;
    check_keys(root, "root", {"problem", "discretization", "study", "output"});
    auto section = [&](const char* name) -> const toml::table* {
        const toml::node* n = root.get(name);
        if (!n)
            return nullptr;
        if (!n->as_table())
            throw ConfigError(std::string("[") + name + "] must be a table");
        return n->as_table();
    };
    if (const auto* p = section("problem")) {
        check_keys(*p, "problem", {"alpha", "T", "m", "initial", "source", "source_f", "source_g"});
        get(*p, "alpha", c.alpha);
        get(*p, "T", c.T);
        get(*p, "m", c.m);
        get_data(*p, "initial", c.initial);
        get(*p, "source", c.source);
        get_data(*p, "source_f", c.source_f);
        if (const toml::node* n = p->get("source_g")) {
            const toml::table* g = n->as_table();
            if (!g)
                throw ConfigError("'source_g' must be a table");
            check_keys(*g, "source_g", {"kind", "value", "rate"});
            get(*g, "kind", c.source_g.kind);
            get(*g, "value", c.source_g.value);
            get(*g, "rate", c.source_g.rate);
        }
    }
    if (const auto* d = section("discretization")) {
        check_keys(*d, "discretization", {"r", "k", "strategy", "solver", "solver_tol", "h_ref", "tau_ref",
                                          "grading_gamma", "grading_d0", "cutoff_r0", "cutoff_r1"});
        get(*d, "r", c.r);
        get(*d, "k", c.k);
        get(*d, "strategy", c.strategy);
        get(*d, "solver", c.solver);
        get(*d, "solver_tol", c.solver_tol);
        get(*d, "h_ref", c.h_ref);
        get(*d, "tau_ref", c.tau_ref);
        get(*d, "grading_gamma", c.grading_gamma);
        get(*d, "grading_d0", c.grading_d0);
        get(*d, "cutoff_r0", c.cutoff_r0);
        get(*d, "cutoff_r1", c.cutoff_r1);
    }
    if (const auto* s = section("study")) {
        check_keys(*s, "study", {"kind", "ladder", "oracle", "oracle_P", "threads", "probes"});
        get(*s, "kind", c.kind);
        get(*s, "oracle", c.oracle);
        get(*s, "oracle_P", c.oracle_P);
        get(*s, "threads", c.threads);
        if (const toml::node* n = s->get("ladder")) {
            const toml::array* a = n->as_array();
            if (!a)
                throw ConfigError("'ladder' must be an array");
            for (const auto& v : *a) {
                auto x = v.value<double>();
                if (!x)
                    throw ConfigError("'ladder' entries must be numbers");
                c.ladder.push_back(*x);
            }
        }
        if (const toml::node* n = s->get("probes")) {
            const toml::array* a = n->as_array();
            if (!a)
                throw ConfigError("'probes' must be an array of points");
            for (const auto& v : *a) {
                const toml::array* pt = v.as_array();
                if (!pt || pt->size() != 2 || !(*pt)[0].value<double>() || !(*pt)[1].value<double>())
                    throw ConfigError("'probes' entries must be [x, y]");
                c.probes.push_back({*(*pt)[0].value<double>(), *(*pt)[1].value<double>()});
            }
        }
    }
    if (const auto* o = section("output")) {
        check_keys(*o, "output", {"csv", "markdown", "probes_csv", "vtk", "include_timing"});
        get(*o, "csv", c.csv);
        get(*o, "markdown", c.markdown);
        get(*o, "probes_csv", c.probes_csv);
        get(*o, "vtk", c.vtk);
        get(*o, "include_timing", c.include_timing);
    }
    c.validate();
    return c;
}

StudyConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---------------------------------------------------------------- meshes

namespace {

int log2_exact(int n, const char* what)
{
    int reds = 0;
    while ((1 << reds) < n)
        ++reds;
    if ((1 << reds) != n)
        throw ConfigError(std::string(what) + ": 1/h must be a power of two for segment-fitted meshes");
    return reds;
}

} // namespace

MeshPtr working_mesh(const StudyConfig& cfg, int n)
{
    const DataSpec* line = cfg.initial.kind == "line" ? &cfg.initial
                           : (cfg.source && cfg.source_f.kind == "line") ? &cfg.source_f
                                                                          : nullptr;
    if (line) {
        const int reds = log2_exact(n, "working mesh");
        MeshPtr m = segment_fitted_square({line->a[0], line->a[1]}, {line->b[0], line->b[1]});
        for (int i = 0; i < reds; ++i)
            m = red_refine(m);
        return m;
    }
    // powers of two are reached by red refinement so that ladders nest
    int base = n;
    int reds = 0;
    while (base % 2 == 0 && base > 1) {
        base /= 2;
        ++reds;
    }
    MeshPtr m = structured_square(base);
    for (int i = 0; i < reds; ++i)
        m = red_refine(m);
    return m;
}

std::vector<MeshPtr> graded_hierarchy(const StudyConfig& cfg, int levels, int n0)
{
    if (cfg.initial.kind != "line")
        throw StrategyMismatch("graded hierarchy requires line initial data");
    const Point p{cfg.initial.a[0], cfg.initial.a[1]}, q{cfg.initial.b[0], cfg.initial.b[1]};
    const int reds = log2_exact(n0, "graded hierarchy");
    MeshPtr base = segment_fitted_square(p, q);
    for (int i = 0; i < reds; ++i)
        base = red_refine(base);
    GradingSpec spec;
    spec.centers = {p, q};
    spec.gamma = cfg.grading_gamma > 0.0 ? cfg.grading_gamma : 0.8 / (cfg.r + 1);
    spec.d0 = cfg.grading_d0;
    std::vector<MeshPtr> out;
    for (int j = 0; j < levels; ++j) {
        spec.h = 1.0 / (n0 * static_cast<double>(1 << j));
        out.push_back(graded_refine(j == 0 ? base : red_refine(out.back()), spec));
    }
    return out;
}

// ---------------------------------------------------------------- orders

std::vector<double> observed_orders(const std::vector<double>& e)
{
    std::vector<double> out(e.size(), nan);
    for (std::size_t i = 1; i < e.size(); ++i)
        if (e[i] > 0.0 && e[i - 1] > 0.0 && std::isfinite(e[i]) && std::isfinite(e[i - 1]))
            out[i] = -(std::log(e[i]) - std::log(e[i - 1])) / std::log(2.0);
    return out;
}

const ReportColumn& ConvergenceReport::column(const std::string& name) const
{
    for (const auto& c : columns)
        if (c.name == name)
            return c;
    throw DomainError("report has no column '" + name + "'");
}

double ConvergenceReport::order(const std::string& name, std::size_t i) const
{
    return observed_orders(column(name).error).at(i);
}

double theoretical_space_order(const StudyConfig& cfg, const std::string& column)
{
    const double r1 = cfg.r + 1.0;
    const std::string& data = cfg.initial.kind;
    const Strategy st = parse_strategy(cfg.strategy);
    if (cfg.source)
        return cfg.source_f.kind == "sine" && (data == "none" || data == "sine") ? r1 : nan;
    if (data == "sine")
        return r1;
    if (data != "point" && data != "line")
        return nan;
    const bool point = data == "point";
    double regular;
    if (cfg.m == 0)
        regular = cfg.alpha == 1.0 ? r1 : (point ? 1.0 : std::min(r1, 2.0));
    else
        regular = std::min(r1, point ? 2.0 * cfg.m + 1.0 : 2.0 * cfg.m + 2.0);
    if (column == "regular")
        return regular;
    double singular = nan;
    if (cfg.m >= 1)
        singular = (st == Strategy::plain) ? std::min(r1, 2.0) : r1;
    if (column == "singular")
        return singular;
    if (cfg.m == 0)
        return regular;
    return std::min(regular, singular);
}

// ---------------------------------------------------------------- level solves

namespace {

SolverOptions solver_options(const StudyConfig& cfg)
{
    SolverOptions o;
    o.kind = cfg.solver == "cg" ? SolverKind::cg : SolverKind::direct;
    o.tol = cfg.solver_tol;
    return o;
}

struct LevelResult {
    FeFunction regular;          // regular part at T
    FeFunction singular;         // singular part at T on the working space
    FeFunction singular_graded;  // graded_plain: singular part at T on the graded space
    Field total;                 // recombined solution at T
    double wall = 0.0;
    long iterations = 0;
    std::vector<std::string> warnings;
};

LevelResult solve_level(const StudyConfig& cfg, const SpacePtr& space, const SpacePtr& graded, double tau)
{
    const auto t0 = std::chrono::steady_clock::now();
    LevelResult out;
    const FracProblem prob = cfg.problem(tau);
    const int N = prob.steps();
    const Strategy st = parse_strategy(cfg.strategy);
    long iters = 0;

    if (cfg.source) {
        const SourceSolution s = source_solve(space, prob, &iters);
        out.regular = s.regular.back();
        out.singular = FeFunction::zero(space);
        for (std::size_t i = 0; i < s.singular_factors.size(); ++i)
            out.singular = axpy(out.singular, s.G[i].back(), s.singular_factors[i]);
        out.total.discrete = axpy(out.regular, 1.0, out.singular);
    }
    if (prob.initial.kind != LoadSpec::Kind::none) {
        const SingularParts sp = singular_parts(space, prob, st, graded);
        out.warnings = sp.warnings;
        const auto traj = step_regular(space, prob, sp.seed, &iters);
        const double T = N * tau;
        FeFunction reg = traj.back();
        FeFunction sing = FeFunction::zero(space);
        Field total;
        for (const auto& phi : sp.phi) {
            const double c = singular_coefficient(phi.j, prob.alpha, T);
            sing = axpy(sing, c, phi.discrete);
            if (phi.dirac)
                total.analytic.push_back({c, phi.dirac, phi.j});
        }
        if (!sp.graded.empty()) {
            FeFunction g = FeFunction::zero(graded);
            for (std::size_t j = 0; j < sp.graded.size(); ++j)
                g = axpy(g, singular_coefficient(static_cast<int>(j) + 1, prob.alpha, T), sp.graded[j]);
            out.singular_graded = out.singular_graded.space ? axpy(out.singular_graded, 1.0, g) : g;
        }
        out.regular = out.regular.space ? axpy(out.regular, 1.0, reg) : reg;
        out.singular = out.singular.space ? axpy(out.singular, 1.0, sing) : sing;
        total.discrete = axpy(out.regular, 1.0, out.singular);
        out.total = std::move(total);
    } else if (!cfg.source) {
        out.regular = out.singular = FeFunction::zero(space);
        out.total.discrete = out.regular;
    }
    iters += space->solver_iterations();
    if (graded)
        iters += graded->solver_iterations();
    out.iterations = iters;
    out.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

double oracle_error(const Field& f, const SpectralReference& ref, double T)
{
    const auto v = [&](Point x) {
        double s = ref(x, T);
        for (const auto& a : f.analytic)
            s -= a.coeff * a.dirac->outer_part(a.j, x);
        return s;
    };
    return norms(f.discrete, v).l2_error;
}

bool unit_square(const TriMesh& m)
{
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& v : m.vertices) {
        x0 = std::min(x0, v.x);
        x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y);
        y1 = std::max(y1, v.y);
    }
    return std::abs(x0) < 1e-12 && std::abs(y0) < 1e-12 && std::abs(x1 - 1) < 1e-12 && std::abs(y1 - 1) < 1e-12 &&
           std::abs(m.total_area() - 1.0) < 1e-12;
}

void check_ladder(const std::vector<double>& ladder)
{
    if (ladder.size() < 3)
        throw ConfigError("ladder needs at least 3 levels");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (std::abs(ladder[i] * 2.0 - ladder[i - 1]) > 1e-12 * ladder[i - 1])
            throw ConfigError("ladder must decrease by a factor of 2");
}

template <class F>
std::vector<LevelResult> run_levels(int L, int threads, F&& solve)
{
    std::vector<LevelResult> res(L);
    for (int start = 0; start < L; start += threads) {
        const int stop = std::min(L, start + threads);
        if (stop - start == 1) {
            res[start] = solve(start);
            continue;
        }
        std::vector<std::future<LevelResult>> jobs;
        for (int j = start; j < stop; ++j)
            jobs.push_back(std::async(std::launch::async, [&, j] { return solve(j); }));
        for (int j = start; j < stop; ++j)
            res[j] = jobs[j - start].get();
    }
    return res;
}

bool below_floor(double e, const FeFunction& u, double tol)
{
    return e < 100.0 * tol * l2_norm(u);
}

std::string data_label(const StudyConfig& cfg)
{
    std::string s = cfg.initial.kind;
    if (cfg.source)
        s += "+source(" + cfg.source_g.kind + "," + cfg.source_f.kind + ")";
    return s;
}

} // namespace

ConvergenceReport run_space_study(const StudyConfig& cfg)
{
    cfg.validate();
    check_ladder(cfg.ladder);
    const auto t0 = std::chrono::steady_clock::now();
    const int L = static_cast<int>(cfg.ladder.size());
    const int n0 = inverse_size(cfg.ladder[0], "ladder");
    const Strategy st = parse_strategy(cfg.strategy);
    const bool graded = st == Strategy::graded_plain && cfg.m >= 1;

    std::vector<MeshPtr> meshes{working_mesh(cfg, n0)};
    for (int j = 1; j < L; ++j)
        meshes.push_back(red_refine(meshes.back()));
    std::vector<MeshPtr> gmeshes;
    if (graded)
        gmeshes = graded_hierarchy(cfg, L, n0);

    const auto opts = solver_options(cfg);
    const auto res = run_levels(L, cfg.threads, [&](int j) {
        auto space = build_space(meshes[j], cfg.r, opts);
        SpacePtr gspace = graded ? build_space(gmeshes[j], cfg.r, opts) : nullptr;
        return solve_level(cfg, space, gspace, cfg.tau_ref);
    });

    ConvergenceReport rep;
    rep.kind = "space";
    rep.alpha = cfg.alpha;
    rep.m = cfg.m;
    rep.k = cfg.k;
    rep.r = cfg.r;
    rep.strategy = cfg.strategy;
    rep.data = data_label(cfg);
    const bool split = cfg.m >= 1 || cfg.source;
    ReportColumn reg{"regular", {}, theoretical_space_order(cfg, "regular")};
    ReportColumn sing{"singular", {}, theoretical_space_order(cfg, "singular")};
    ReportColumn rec{"recombined", {}, theoretical_space_order(cfg, "recombined")};
    ReportColumn orc{"oracle", {}, theoretical_space_order(cfg, "recombined")};
    const bool oracle = cfg.oracle && unit_square(*meshes[0]);
    std::unique_ptr<SpectralReference> ref;
    if (oracle)
        ref = std::make_unique<SpectralReference>(cfg.problem(cfg.tau_ref), cfg.oracle_P);

    for (int j = 0; j + 1 < L; ++j) {
        const auto& a = res[j];
        const auto& b = res[j + 1];
        rep.levels.push_back(cfg.ladder[j]);
        const double er = norms(a.regular, b.regular).l2_error;
        double es = nan, ec = nan;
        if (split) {
            es = graded ? norms(a.singular_graded, b.singular_graded).l2_error : norms(a.singular, b.singular).l2_error;
            if (!graded)
                ec = norms(a.total.discrete, b.total.discrete).l2_error;
        } else {
            ec = er;
        }
        reg.error.push_back(er);
        sing.error.push_back(es);
        rec.error.push_back(ec);
        if (oracle)
            orc.error.push_back(oracle_error(a.total, *ref, cfg.problem(cfg.tau_ref).steps() * cfg.tau_ref));
        const double e = graded ? er : (split ? ec : er);
        rep.floor.push_back(below_floor(e, b.total.discrete, cfg.solver_tol));
        rep.wall_time.push_back(a.wall);
        rep.iterations.push_back(a.iterations);
    }
    if (split) {
        rep.columns.push_back(std::move(reg));
        rep.columns.push_back(std::move(sing));
    }
    rep.columns.push_back(std::move(rec));
    if (oracle)
        rep.columns.push_back(std::move(orc));
    rep.total_wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

ConvergenceReport run_time_study(const StudyConfig& cfg)
{
    cfg.validate();
    check_ladder(cfg.ladder);
    const auto t0 = std::chrono::steady_clock::now();
    const int L = static_cast<int>(cfg.ladder.size());
    const int n = inverse_size(cfg.h_ref, "h_ref");
    const Strategy st = parse_strategy(cfg.strategy);
    const bool graded = st == Strategy::graded_plain && cfg.m >= 1;
    const auto opts = solver_options(cfg);

    auto space = build_space(working_mesh(cfg, n), cfg.r, opts);
    SpacePtr gspace = graded ? build_space(graded_hierarchy(cfg, 1, n).front(), cfg.r, opts) : nullptr;
    const auto res = run_levels(L, cfg.threads, [&](int j) { return solve_level(cfg, space, gspace, cfg.ladder[j]); });

    ConvergenceReport rep;
    rep.kind = "time";
    rep.alpha = cfg.alpha;
    rep.m = cfg.m;
    rep.k = cfg.k;
    rep.r = cfg.r;
    rep.strategy = cfg.strategy;
    rep.data = data_label(cfg);
    ReportColumn rec{"recombined", {}, static_cast<double>(cfg.k)};
    ReportColumn orc{"oracle", {}, static_cast<double>(cfg.k)};
    const bool oracle = cfg.oracle;
    for (int j = 0; j + 1 < L; ++j) {
        const auto& a = res[j];
        const auto& b = res[j + 1];
        rep.levels.push_back(cfg.ladder[j]);
        const double e = norms(a.total.discrete, b.total.discrete).l2_error;
        rec.error.push_back(e);
        if (oracle) {
            const SpectralReference ref(cfg.problem(cfg.ladder[j]), cfg.oracle_P);
            orc.error.push_back(oracle_error(a.total, ref, cfg.T));
        }
        rep.floor.push_back(below_floor(e, b.total.discrete, cfg.solver_tol));
        rep.wall_time.push_back(a.wall);
        rep.iterations.push_back(a.iterations);
    }
    rep.columns.push_back(std::move(rec));
    if (oracle)
        rep.columns.push_back(std::move(orc));
    rep.total_wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------- output

namespace {

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string level_label(double h)
{
    const double n = std::round(1.0 / h);
    if (n >= 1.0 && std::abs(n * h - 1.0) < 1e-9)
        return "1/" + std::to_string(static_cast<long>(n));
    return fmt("%.6g", h);
}

std::string csv_number(double v)
{
    if (std::isnan(v))
        return "nan";
    return fmt("%.17g", v);
}

} // namespace

std::string format_report(const ConvergenceReport& rep, Format f, bool include_timing)
{
    std::ostringstream os;
    const std::string sym = rep.kind == "time" ? "tau_j" : "h_j";
    if (f == Format::csv) {
        os << "# kind=" << rep.kind << ",alpha=" << csv_number(rep.alpha) << ",m=" << rep.m << ",k=" << rep.k
           << ",r=" << rep.r << ",strategy=" << rep.strategy << ",data=" << rep.data << "\n";
        os << "# theoretical";
        for (const auto& c : rep.columns)
            os << "," << c.name << "=" << csv_number(c.theoretical);
        os << "\n";
        os << "level";
        for (const auto& c : rep.columns)
            os << ",E_" << c.name << ",order_" << c.name;
        os << ",floor";
        if (include_timing)
            os << ",wall_s,iterations";
        os << "\n";
        std::vector<std::vector<double>> orders;
        for (const auto& c : rep.columns)
            orders.push_back(observed_orders(c.error));
        for (std::size_t i = 0; i < rep.levels.size(); ++i) {
            os << csv_number(rep.levels[i]);
            for (std::size_t c = 0; c < rep.columns.size(); ++c)
                os << "," << csv_number(rep.columns[c].error[i]) << ","
                   << (std::isnan(orders[c][i]) ? std::string("nan") : fmt("%.6f", orders[c][i]));
            os << "," << (rep.floor[i] ? 1 : 0);
            if (include_timing)
                os << "," << fmt("%.3f", rep.wall_time[i]) << "," << rep.iterations[i];
            os << "\n";
        }
        return os.str();
    }

    os << "**" << rep.kind << " study**: alpha = " << fmt("%g", rep.alpha) << ", m = " << rep.m << ", k = " << rep.k
       << ", r = " << rep.r << ", strategy = " << rep.strategy << ", data = " << rep.data << "\n\n";
    os << "| " << sym;
    for (const auto& c : rep.columns)
        os << " | E " << c.name << " | conv.";
    if (include_timing)
        os << " | wall [s] | iterations";
    os << " |\n|---";
    for (std::size_t c = 0; c < rep.columns.size(); ++c)
        os << "|---:|---:";
    if (include_timing)
        os << "|---:|---:";
    os << "|\n";
    std::vector<std::vector<double>> orders;
    for (const auto& c : rep.columns)
        orders.push_back(observed_orders(c.error));
    for (std::size_t i = 0; i < rep.levels.size(); ++i) {
        os << "| " << level_label(rep.levels[i]);
        for (std::size_t c = 0; c < rep.columns.size(); ++c) {
            const double e = rep.columns[c].error[i];
            os << " | " << (std::isnan(e) ? std::string("n/a") : fmt("%.2e", e) + (rep.floor[i] ? "*" : ""));
            os << " | " << (std::isnan(orders[c][i]) ? std::string("-") : fmt("%.2f", orders[c][i]));
        }
        if (include_timing)
            os << " | " << fmt("%.2f", rep.wall_time[i]) << " | " << rep.iterations[i];
        os << " |\n";
    }
    os << "| theor. conv.";
    for (const auto& c : rep.columns)
        os << " | | " << (std::isnan(c.theoretical) ? std::string("-") : fmt("%.2f", c.theoretical));
    if (include_timing)
        os << " | | ";
    os << " |\n";
    bool any_floor = false;
    for (bool b : rep.floor)
        any_floor = any_floor || b;
    if (any_floor)
        os << "\n`*` error below 100 x solver tolerance; the order in that row is unreliable.\n";
    return os.str();
}

void emit(const ConvergenceReport& rep, Format f, const std::string& path, bool include_timing)
{
    std::ofstream out(path);
    if (!out)
        throw Error("emit: cannot open " + path);
    out << format_report(rep, f, include_timing);
    if (!out)
        throw Error("emit: write failed for " + path);
}

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        out.push_back(cur);
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

double parse_number(const std::string& s, long line)
{
    if (s == "nan")
        return nan;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size())
            throw ParseError("report csv: bad number '" + s + "'", line);
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("report csv: bad number '" + s + "'", line);
    }
}

} // namespace

ConvergenceReport read_report_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("read_report_csv: cannot open " + path);
    ConvergenceReport rep;
    std::string line;
    long lineno = 0;
    std::vector<std::string> header;
    std::vector<std::pair<std::string, double>> theo;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        if (line.rfind("# theoretical", 0) == 0) {
            for (const auto& kv : split(line.substr(13), ',')) {
                if (kv.empty())
                    continue;
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw ParseError("report csv: bad theoretical entry", lineno);
                theo.emplace_back(kv.substr(0, eq), parse_number(kv.substr(eq + 1), lineno));
            }
            continue;
        }
        if (line.rfind("# ", 0) == 0) {
            for (const auto& kv : split(line.substr(2), ',')) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    continue;
                const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                if (key == "kind")
                    rep.kind = val;
                else if (key == "alpha")
                    rep.alpha = parse_number(val, lineno);
                else if (key == "m")
                    rep.m = std::stoi(val);
                else if (key == "k")
                    rep.k = std::stoi(val);
                else if (key == "r")
                    rep.r = std::stoi(val);
                else if (key == "strategy")
                    rep.strategy = val;
                else if (key == "data")
                    rep.data = val;
            }
            continue;
        }
        const auto cells = split(line, ',');
        if (header.empty()) {
            header = cells;
            if (header.empty() || header[0] != "level")
                throw ParseError("report csv: missing header", lineno);
            for (const auto& h : header)
                if (h.rfind("E_", 0) == 0) {
                    ReportColumn c;
                    c.name = h.substr(2);
                    c.theoretical = nan;
                    for (const auto& [n, v] : theo)
                        if (n == c.name)
                            c.theoretical = v;
                    rep.columns.push_back(c);
                }
            continue;
        }
        if (cells.size() != header.size())
            throw ParseError("report csv: wrong number of cells", lineno);
        std::size_t col = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const std::string& h = header[i];
            if (h == "level")
                rep.levels.push_back(parse_number(cells[i], lineno));
            else if (h.rfind("E_", 0) == 0)
                rep.columns[col++].error.push_back(parse_number(cells[i], lineno));
            else if (h == "floor")
                rep.floor.push_back(cells[i] == "1");
            else if (h == "wall_s")
                rep.wall_time.push_back(parse_number(cells[i], lineno));
            else if (h == "iterations")
                rep.iterations.push_back(std::stol(cells[i]));
        }
    }
    if (header.empty())
        throw ParseError("report csv: missing header", lineno);
    if (rep.wall_time.empty()) {
        rep.wall_time.assign(rep.levels.size(), 0.0);
        rep.iterations.assign(rep.levels.size(), 0);
    }
    return rep;
}

// ---------------------------------------------------------------- single solve

SolveOutput run_solve(const StudyConfig& cfg)
{
    cfg.validate();
    const int n = inverse_size(cfg.h_ref, "h_ref");
    const auto opts = solver_options(cfg);
    auto space = build_space(working_mesh(cfg, n), cfg.r, opts);
    const Strategy st = parse_strategy(cfg.strategy);
    SpacePtr gspace;
    if (st == Strategy::graded_plain && cfg.m >= 1)
        gspace = build_space(graded_hierarchy(cfg, 1, n).front(), cfg.r, opts);
    const FracProblem prob = cfg.problem(cfg.tau_ref);
    const int N = prob.steps();

    SolveOutput out;
    std::vector<Field> fields(N + 1);
    for (auto& f : fields)
        f.discrete = FeFunction::zero(space);
    if (cfg.source) {
        const SourceSolution s = source_solve(space, prob);
        for (int i = 0; i <= N; ++i)
            fields[i].discrete = s.total(i);
    }
    int first = 0;
    if (prob.initial.kind != LoadSpec::Kind::none) {
        const SingularParts sp = singular_parts(space, prob, st, gspace);
        out.warnings = sp.warnings;
        SplitSolution sol;
        sol.alpha = prob.alpha;
        sol.tau = prob.tau;
        sol.m = prob.m;
        sol.singular = sp.phi;
        sol.regular = step_regular(space, prob, sp.seed);
        first = prob.m >= 1 ? 1 : 0;
        for (int i = first; i <= N; ++i) {
            Field f = recombine(sol, i);
            fields[i].discrete = axpy(fields[i].discrete, 1.0, f.discrete);
            fields[i].analytic = f.analytic;
        }
    }
    if (cfg.source && first == 0 && cfg.m >= 1)
        first = 1;
    for (int i = first; i <= N; ++i) {
        out.times.push_back(i * prob.tau);
        std::vector<double> row;
        for (const auto& p : cfg.probes)
            row.push_back(fields[i].eval({p[0], p[1]}));
        out.probe_values.push_back(std::move(row));
    }
    const Field& last = fields[N];
    out.final_field = interpolate(space, [&](Point x) { return last.eval(x); });
    return out;
}

} // namespace fracsplit
