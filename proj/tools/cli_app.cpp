#include "cli_app.hpp"

#include "tiltprice/errors.hpp"
#include "tiltprice/hash.hpp"
#include "tiltprice/pricing.hpp"
#include "tiltprice/tilt.hpp"
#include "tiltprice/trinomial.hpp"

#include <CLI11.hpp>
#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

namespace tiltprice::cli {

namespace {

constexpr double kExtremeRho = 0.999;
constexpr std::size_t kExtremeRhoPaths = 1000000;

double parse_double(const std::string& raw, const std::string& key)
{
    std::string s = boost::algorithm::trim_copy(raw);
    std::string lower = boost::algorithm::to_lower_copy(s);
    if (lower == "inf" || lower == "+inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (lower == "-inf") {
        return -std::numeric_limits<double>::infinity();
    }
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
        throw ConfigError("config key " + key + ": expected a number, got '" + raw + "'");
    }
    return v;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::filesystem::path resolve(const RunConfig& cfg, const std::string& p)
{
    std::filesystem::path path(p);
    return path.is_absolute() ? path : cfg.base_dir() / path;
}

// Two-column numeric CSV; '#' lines and a non-numeric first line are skipped.
std::vector<std::pair<double, double>> read_pairs(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open table " + path.string());
    }
    std::vector<std::pair<double, double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        boost::algorithm::trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> cells;
        boost::algorithm::split(cells, line, boost::is_any_of(","));
        if (cells.size() != 2) {
            throw ConfigError(path.string() + ": expected two columns: " + line);
        }
        try {
            rows.emplace_back(parse_double(cells[0], path.string()),
                              parse_double(cells[1], path.string()));
        } catch (const ConfigError&) {
            if (!first) {
                throw;
            }
        }
        first = false;
    }
    return rows;
}

struct NamedColumns {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    const std::vector<double>* find(const std::string& name) const
    {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) {
                return &columns[i];
            }
        }
        return nullptr;
    }
};

NamedColumns read_columns(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open sample " + path.string());
    }
    NamedColumns out;
    std::string line;
    while (std::getline(in, line)) {
        boost::algorithm::trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> cells;
        boost::algorithm::split(cells, line, boost::is_any_of(","));
        if (out.names.empty()) {
            for (auto& c : cells) {
                out.names.push_back(boost::algorithm::trim_copy(c));
            }
            out.columns.resize(cells.size());
            continue;
        }
        if (cells.size() != out.names.size()) {
            throw ConfigError(path.string() + ": ragged row: " + line);
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out.columns[i].push_back(parse_double(cells[i], path.string()));
        }
    }
    return out;
}

void add_simulation_meta(CsvTable& t, const RunConfig& cfg, const PathBatch& batch)
{
    t.meta.emplace_back("seed", std::to_string(batch.seed));
    t.meta.emplace_back("n_paths", std::to_string(batch.n_paths));
    t.meta.emplace_back("n_steps", std::to_string(batch.n_steps));
    t.meta.emplace_back("config_hash", hex64(cfg.hash()));
    t.meta.emplace_back("model_hash", hex64(batch.model_hash));
}

void add_config_meta(CsvTable& t, const RunConfig& cfg)
{
    t.meta.emplace_back("config_hash", hex64(cfg.hash()));
}

void check_rhos(const std::vector<double>& rhos, const RunOptions& options,
                std::size_t n_paths)
{
    for (double rho : rhos) {
        if (!(std::abs(rho) < 1.0)) {
            std::ostringstream os;
            os << "rho = " << rho << " is outside (-1, 1)";
            throw DomainError(os.str());
        }
        if (std::abs(rho) > kExtremeRho) {
            if (!options.allow_extreme_rho) {
                std::ostringstream os;
                os << "rho = " << rho << " exceeds " << kExtremeRho
                   << " in magnitude; pass --allow-extreme-rho";
                throw DomainError(os.str());
            }
            if (n_paths < kExtremeRhoPaths) {
                std::ostringstream os;
                os << "rho = " << rho << " needs n_paths >= " << kExtremeRhoPaths
                   << " (got " << n_paths << ")";
                throw DomainError(os.str());
            }
        }
    }
}

PathBatch load_or_simulate(const RunConfig& cfg, const BasisRiskModel& model,
                           const SimulationSettings& settings)
{
    if (!cfg.has("simulation.batch_path")) {
        return simulate(model, settings);
    }
    auto path = resolve(cfg, cfg.get_string("simulation.batch_path"));
    if (std::filesystem::exists(path)) {
        auto batch = read_batch_csv(path);
        if (batch.seed != settings.seed || batch.n_paths != settings.n_paths
            || batch.n_steps != settings.n_steps
            || batch.model_hash != model.path_hash()
            || batch.measure != settings.measure) {
            throw ConfigError("cached batch " + path.string()
                              + " does not match the [model] and [simulation] "
                                "sections; remove it or change batch_path");
        }
        return batch;
    }
    auto batch = simulate(model, settings);
    write_batch_csv(batch, path);
    return batch;
}

struct Market {
    BasisRiskModel model;
    ClaimSpec claim;
    SimulationSettings settings;
    PathBatch batch;
};

Market market_from_config(const RunConfig& cfg)
{
    Market m{model_from_config(cfg), claim_from_config(cfg),
             simulation_from_config(cfg), {}};
    m.model.validate();
    m.batch = load_or_simulate(cfg, m.model, m.settings);
    return m;
}

CsvTable run_price(const RunOptions& options, const RunConfig& cfg)
{
    auto rhos = cfg.get_list("experiment.rho");
    auto qs = cfg.get_list("experiment.q");
    const double alpha = cfg.get_double("experiment.alpha");
    check_rhos(rhos, options, cfg.get_uint("simulation.n_paths"));
    auto m = market_from_config(cfg);
    CsvTable t;
    add_simulation_meta(t, cfg, m.batch);
    t.header = {"alpha", "q", "rho", "price", "std_error"};
    for (double rho : rhos) {
        for (double q : qs) {
            auto r = exp_indifference_price(m.batch, alpha, q, m.claim, rho);
            t.add_row({alpha, q, rho, r.price, r.std_error});
        }
    }
    return t;
}

CsvTable run_optimal_quantity(const RunOptions& options, const RunConfig& cfg)
{
    auto rhos = cfg.get_list("experiment.rho");
    auto ps = cfg.get_list("experiment.p");
    const double alpha = cfg.get_double("experiment.alpha");
    const double tol = cfg.get_double("experiment.tol", kDefaultTiltTol);
    check_rhos(rhos, options, cfg.get_uint("simulation.n_paths"));
    auto m = market_from_config(cfg);
    CsvTable t;
    add_simulation_meta(t, cfg, m.batch);
    t.header = {"alpha", "p", "rho", "beta", "beta_std_error", "q"};
    for (double rho : rhos) {
        for (double p : ps) {
            auto r = optimal_quantity(m.batch, alpha, p, rho, m.claim, tol);
            t.add_row({alpha, p, rho, r.beta, r.beta_std_error, r.q});
        }
    }
    return t;
}

CsvTable run_limit_study(const RunOptions& options, const RunConfig& cfg)
{
    auto rhos = cfg.get_list("experiment.rho");
    const double alpha = cfg.get_double("experiment.alpha");
    const std::string study = cfg.get_string("experiment.study", "both");
    if (study != "both" && study != "quantity" && study != "price") {
        throw ConfigError("config key experiment.study: expected quantity, price "
                          "or both, got '" + study + "'");
    }
    check_rhos(rhos, options, cfg.get_uint("simulation.n_paths"));
    auto m = market_from_config(cfg);
    CsvTable t;
    add_simulation_meta(t, cfg, m.batch);
    t.header = {"study", "rho", "q_n", "value", "value_se",
                "target", "target_se", "gap", "joint_se"};

    if (study != "price") {
        double p = 0.0;
        if (cfg.has("experiment.p")) {
            p = cfg.get_double("experiment.p");
        } else {
            auto h = m.claim.evaluate(m.batch.y_T);
            p = weighted_mean(h, q_measure_weights(m.batch)).value
                - cfg.get_double("experiment.p_offset", 0.05);
        }
        t.meta.emplace_back("p", format_double(p));
        auto table = quantity_limit_product(m.batch, alpha, p, m.claim, rhos);
        for (const auto& r : table.rows) {
            t.rows.push_back({"quantity", format_double(r.rho), format_double(r.q_n),
                              format_double(r.product), format_double(r.product_se),
                              format_double(table.target),
                              format_double(table.target_se), format_double(r.gap),
                              format_double(r.joint_se)});
        }
    }
    if (study != "quantity") {
        const double gamma = cfg.get_double("experiment.gamma");
        auto table = price_limit_study(m.batch, alpha, gamma, m.claim, rhos);
        for (const auto& r : table.rows) {
            t.rows.push_back({"price", format_double(r.rho), format_double(r.q_n),
                              format_double(r.price), format_double(r.price_se),
                              format_double(table.limit.value),
                              format_double(table.limit.std_error),
                              format_double(r.gap), format_double(r.joint_se)});
        }
    }
    return t;
}

CsvTable run_fixed_market(const RunOptions& options, const RunConfig& cfg)
{
    const double rho = cfg.get_double("experiment.rho_fixed");
    auto qs = cfg.get_list("experiment.q_schedule");
    const double alpha = cfg.get_double("experiment.alpha");
    check_rhos({rho}, options, cfg.get_uint("simulation.n_paths"));
    auto m = market_from_config(cfg);
    CsvTable t;
    add_simulation_meta(t, cfg, m.batch);
    t.header = {"q", "price", "std_error", "sample_min"};
    for (const auto& r : fixed_market_price_decay(m.batch, alpha, m.claim, rho, qs)) {
        t.add_row({r.q, r.price, r.std_error, r.sample_min});
    }
    return t;
}

TrinomialModel trinomial_from_config(const RunConfig& cfg)
{
    TrinomialModel m;
    m.u = cfg.get_double("trinomial.u", 0.5);
    if (cfg.has("trinomial.h_bar")) {
        if (cfg.has("trinomial.h_u") || cfg.has("trinomial.h_d")) {
            throw ConfigError("config section [trinomial]: give h_bar or h_u/h_d, "
                              "not both");
        }
        m.h_u = m.h_d = cfg.get_double("trinomial.h_bar");
    } else {
        m.h_u = cfg.get_double("trinomial.h_u");
        m.h_d = cfg.get_double("trinomial.h_d");
    }
    m.h_m = cfg.get_double("trinomial.h_m");
    m.validate();
    return m;
}

CsvTable run_trinomial(const RunOptions& options, const RunConfig& cfg)
{
    auto model = trinomial_from_config(cfg);
    auto qs = cfg.get_list("trinomial.q_schedule");
    const double x = cfg.get_double("trinomial.x", 0.0);
    CsvTable t;
    add_config_meta(t, cfg);
    if (options.demo == "nonconvergence") {
        const double alpha = cfg.get_double("utility.alpha");
        t.meta.emplace_back("demo", "nonconvergence");
        t.header = {"q", "price", "limit_rate_alpha", "limit_rate_2alpha"};
        for (const auto& r : nonconvergence_demo(alpha, x, model, qs)) {
            t.add_row({r.q, r.price, r.limit_rate_alpha, r.limit_rate_2alpha});
        }
        return t;
    }
    if (!options.demo.empty()) {
        throw ConfigError("unknown demo '" + options.demo + "'");
    }
    auto spec = utility_from_config(cfg);
    const double tol = cfg.get_double("trinomial.tol", kDefaultTrinomialTol);
    t.header = {"q", "price_exponential", "price_general", "limit"};
    for (const auto& r : trinomial_schedule(spec, x, model, qs, tol)) {
        t.add_row({r.q, r.price_exponential, r.price_general, r.limit});
    }
    return t;
}

CsvTable run_tilt_solve(const RunOptions& options, const RunConfig& cfg)
{
    auto ps = cfg.get_list("tilt.p");
    const double tol = cfg.get_double("tilt.tol", kDefaultTiltTol);
    CsvTable t;
    std::optional<TiltSample> sample;
    if (cfg.has("tilt.sample_path")) {
        auto cols = read_columns(resolve(cfg, cfg.get_string("tilt.sample_path")));
        const auto* x = cols.find("x");
        if (x == nullptr) {
            throw ConfigError("tilt sample needs an x column");
        }
        const auto* y = cols.find("y");
        const auto* z = cols.find("z");
        sample.emplace(*x, y ? *y : std::vector<double>(x->size(), 0.0),
                       z ? *z : std::vector<double>(x->size(), 1.0));
        add_config_meta(t, cfg);
    } else {
        const double rho = cfg.get_double("tilt.rho");
        if (std::abs(rho) > kExtremeRho && std::abs(rho) < 1.0) {
            check_rhos({rho}, options, cfg.get_uint("simulation.n_paths"));
        }
        auto m = market_from_config(cfg);
        sample.emplace(tilt_sample_from_batch(m.batch, m.claim, rho));
        add_simulation_meta(t, cfg, m.batch);
    }
    t.header = {"p", "beta", "std_error", "iterations"};
    for (double p : ps) {
        auto s = solve_tilt(*sample, p, tol);
        t.add_row({p, s.beta, s.std_error, static_cast<double>(s.iterations)});
    }
    return t;
}

CsvTable run_check_utility(const RunOptions&, const RunConfig& cfg)
{
    auto spec = utility_from_config(cfg);
    std::vector<double> grid;
    if (cfg.has("utility.grid_min") || cfg.has("utility.grid_max")) {
        const double lo = cfg.get_double("utility.grid_min");
        const double hi = cfg.get_double("utility.grid_max");
        const auto n = cfg.get_uint("utility.grid_points");
        if (!(lo < hi) || n < 3) {
            throw ConfigError("utility grid needs grid_min < grid_max and "
                              "grid_points >= 3");
        }
        for (std::uint64_t i = 0; i < n; ++i) {
            grid.push_back(lo + (hi - lo) * static_cast<double>(i)
                                    / static_cast<double>(n - 1));
        }
    } else {
        grid = default_membership_grid(spec);
    }
    auto r = check_membership(spec, grid);
    CsvTable t;
    add_config_meta(t, cfg);
    t.meta.emplace_back("family", cfg.get_string("utility.family"));
    t.header = {"alpha", "K", "u_prime_at_zero", "risk_aversion_min",
                "risk_aversion_max", "k_u", "deepest_x", "next_x",
                "decay_rate_point", "decay_rate_next", "decay_rate_secant",
                "u_prime_ok", "risk_aversion_bounded", "negative", "increasing",
                "concave", "decay_rate_ok", "grid_depth_ok", "member"};
    auto flag = [](bool b) { return b ? 1.0 : 0.0; };
    t.add_row({spec.alpha(), spec.perturbation(), r.u_prime_at_zero,
               r.risk_aversion_min, r.risk_aversion_max, r.k_u, r.deepest_x,
               r.next_x, r.decay_rate_point, r.decay_rate_next, r.decay_rate_secant,
               flag(r.u_prime_ok), flag(r.risk_aversion_bounded), flag(r.negative),
               flag(r.increasing), flag(r.concave), flag(r.decay_rate_ok),
               flag(r.grid_depth_ok), flag(r.member())});
    return t;
}

} // namespace

//---------------------------------------------------------------------------//
// RunConfig
//---------------------------------------------------------------------------//

RunConfig RunConfig::from_file(const std::filesystem::path& path)
{
    auto cfg = from_string(read_file(path));
    cfg.base_dir_ = path.parent_path();
    return cfg;
}

RunConfig RunConfig::from_string(const std::string& text)
{
    RunConfig cfg;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, cfg.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
        std::ostringstream os;
        os << "malformed config at line " << e.line() << ": " << e.message();
        throw ConfigError(os.str());
    }
    cfg.hash_ = fnv1a64(text);
    return cfg;
}

bool RunConfig::has(const std::string& key) const
{
    return static_cast<bool>(tree_.get_optional<std::string>(key));
}

bool RunConfig::has_section(const std::string& section) const
{
    return tree_.find(section) != tree_.not_found();
}

std::string RunConfig::get_string(const std::string& key) const
{
    auto v = tree_.get_optional<std::string>(key);
    if (!v) {
        auto dot = key.find('.');
        std::string section = key.substr(0, dot);
        if (!has_section(section)) {
            throw ConfigError("missing config section [" + section + "] (needed for "
                              + key + ")");
        }
        throw ConfigError("missing config key " + key);
    }
    return boost::algorithm::trim_copy(*v);
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const
{
    return has(key) ? get_string(key) : fallback;
}

double RunConfig::get_double(const std::string& key) const
{
    return parse_double(get_string(key), key);
}

double RunConfig::get_double(const std::string& key, double fallback) const
{
    return has(key) ? get_double(key) : fallback;
}

std::uint64_t RunConfig::get_uint(const std::string& key) const
{
    std::string s = get_string(key);
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
        // allow 2e5 style counts when they are whole numbers
        double d = parse_double(s, key);
        if (!(d >= 0.0) || d != std::floor(d) || d > 9.0e15) {
            throw ConfigError("config key " + key
                              + ": expected a non-negative integer, got '" + s + "'");
        }
        return static_cast<std::uint64_t>(d);
    }
    return v;
}

std::vector<double> RunConfig::get_list(const std::string& key) const
{
    std::string s = get_string(key);
    std::vector<std::string> cells;
    boost::algorithm::split(cells, s, boost::is_any_of(","));
    std::vector<double> out;
    for (const auto& c : cells) {
        out.push_back(parse_double(c, key));
    }
    return out;
}

//---------------------------------------------------------------------------//
// Section readers
//---------------------------------------------------------------------------//

Coefficient parse_coefficient(const std::string& text, const std::string& key)
{
    std::string s = boost::algorithm::erase_all_copy(text, " ");
    if (boost::algorithm::ends_with(s, "*y")) {
        return Coefficient::proportional(parse_double(s.substr(0, s.size() - 2), key));
    }
    return Coefficient::constant(parse_double(s, key));
}

BasisRiskModel model_from_config(const RunConfig& cfg)
{
    BasisRiskModel m;
    m.mu = parse_coefficient(cfg.get_string("model.mu"), "model.mu");
    m.sigma = parse_coefficient(cfg.get_string("model.sigma"), "model.sigma");
    m.b = parse_coefficient(cfg.get_string("model.b"), "model.b");
    m.a = parse_coefficient(cfg.get_string("model.a"), "model.a");
    m.y0 = cfg.get_double("model.y0");
    m.T = cfg.get_double("model.T");
    m.E.lo = cfg.get_double("model.E_lo", -std::numeric_limits<double>::infinity());
    m.E.hi = cfg.get_double("model.E_hi", std::numeric_limits<double>::infinity());
    return m;
}

ClaimSpec claim_from_config(const RunConfig& cfg)
{
    const std::string form = cfg.get_string("claim.form");
    if (form == "capped_linear") {
        return ClaimSpec::capped_linear(cfg.get_double("claim.cap"));
    }
    if (form == "digital") {
        return ClaimSpec::digital(cfg.get_double("claim.threshold"),
                                  cfg.get_double("claim.width"));
    }
    if (form == "tabulated") {
        return ClaimSpec::tabulated(
            read_pairs(resolve(cfg, cfg.get_string("claim.table_path"))));
    }
    if (form == "constant") {
        return ClaimSpec::constant(cfg.get_double("claim.value"));
    }
    throw ConfigError("config key claim.form: unknown form '" + form
                      + "' (capped_linear, digital, tabulated, constant)");
}

UtilitySpec utility_from_config(const RunConfig& cfg)
{
    const std::string family = cfg.get_string("utility.family");
    if (family == "exponential") {
        return UtilitySpec::exponential(cfg.get_double("utility.alpha"));
    }
    if (family == "perturbed") {
        return UtilitySpec::perturbed(cfg.get_double("utility.alpha"),
                                      cfg.get_double("utility.K"));
    }
    if (family == "tabulated") {
        return UtilitySpec::tabulated(
            read_pairs(resolve(cfg, cfg.get_string("utility.table_path"))),
            cfg.get_double("utility.alpha"));
    }
    throw ConfigError("config key utility.family: unknown family '" + family
                      + "' (exponential, perturbed, tabulated)");
}

SimulationSettings simulation_from_config(const RunConfig& cfg)
{
    SimulationSettings s;
    s.n_paths = cfg.get_uint("simulation.n_paths");
    s.n_steps = cfg.get_uint("simulation.n_steps");
    s.seed = cfg.get_uint("simulation.seed");
    if (cfg.has("simulation.workers")) {
        s.workers = static_cast<unsigned>(cfg.get_uint("simulation.workers"));
    }
    const std::string measure = cfg.get_string("simulation.measure", "P");
    if (measure == "P") {
        s.measure = Measure::physical;
    } else if (measure == "Q") {
        s.measure = Measure::pricing;
    } else {
        throw ConfigError("config key simulation.measure: expected P or Q");
    }
    return s;
}

//---------------------------------------------------------------------------//
// CSV output
//---------------------------------------------------------------------------//

std::string format_double(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

void CsvTable::add_row(std::vector<double> values)
{
    std::vector<std::string> row;
    row.reserve(values.size());
    for (double v : values) {
        row.push_back(format_double(v));
    }
    rows.push_back(std::move(row));
}

void write_csv_atomic(const CsvTable& table, const std::filesystem::path& path)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ConfigError("cannot open " + tmp.string() + " for writing");
        }
        out << "#";
        for (const auto& [k, v] : table.meta) {
            out << ' ' << k << '=' << v;
        }
        out << '\n' << boost::algorithm::join(table.header, ",") << '\n';
        for (const auto& row : table.rows) {
            out << boost::algorithm::join(row, ",") << '\n';
        }
        if (!out.flush()) {
            throw ConfigError("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

//---------------------------------------------------------------------------//
// Dispatch
//---------------------------------------------------------------------------//

CsvTable run_command(const RunOptions& options, const RunConfig& cfg)
{
    const auto& c = options.command;
    CsvTable t;
    if (c == "price") {
        t = run_price(options, cfg);
    } else if (c == "optimal-quantity") {
        t = run_optimal_quantity(options, cfg);
    } else if (c == "limit-study") {
        t = run_limit_study(options, cfg);
    } else if (c == "fixed-market-study") {
        t = run_fixed_market(options, cfg);
    } else if (c == "trinomial") {
        t = run_trinomial(options, cfg);
    } else if (c == "tilt-solve") {
        t = run_tilt_solve(options, cfg);
    } else if (c == "check-utility") {
        t = run_check_utility(options, cfg);
    } else {
        throw ConfigError("unknown subcommand '" + c + "'");
    }
    t.meta.insert(t.meta.begin(), {"command", c});
    return t;
}

std::filesystem::path output_path(const RunOptions& options, const RunConfig& cfg)
{
    if (options.output) {
        return *options.output;
    }
    if (cfg.has("output.path")) {
        return resolve(cfg, cfg.get_string("output.path"));
    }
    throw ConfigError("no output path: pass --output or set [output] path");
}

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e)) {
        return 2;
    }
    if (dynamic_cast<const NumericalError*>(&e)) {
        return 4;
    }
    if (dynamic_cast<const DomainError*>(&e)) {
        return 3;
    }
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) {
        return 2;
    }
    return 4;
}

int main(int argc, char** argv)
{
    CLI::App app{"Exponential-utility indifference pricing under basis risk"};
    app.require_subcommand(1);
    RunOptions options;
    std::string config;
    std::string output;

    const std::map<std::string, std::string> about = {
        {"price", "indifference prices over a (q, rho) grid"},
        {"optimal-quantity", "optimal quantities q_n(p) over a (p, rho) grid"},
        {"limit-study", "quantity and price limits as rho -> 1"},
        {"fixed-market-study", "price decay for increasing q at fixed rho"},
        {"trinomial", "exact trinomial prices and limits"},
        {"tilt-solve", "solve the tilt equation for beta"},
        {"check-utility", "admissibility and decay-rate report for a utility"},
    };
    for (const auto& name : subcommands()) {
        auto* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("-c,--config", config, "INI run configuration")->required();
        sub->add_option("-o,--output", output, "CSV output path");
        sub->add_flag("--allow-extreme-rho", options.allow_extreme_rho,
                      "permit |rho| > 0.999 (needs n_paths >= 1e6)");
        if (name == "trinomial") {
            sub->add_option("--demo", options.demo, "run a demonstration")
                ->check(CLI::IsMember({"nonconvergence"}));
        }
        sub->callback([&options, name] { options.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "tiltprice: error: " << e.what() << '\n';
        return 2;
    }

    try {
        options.config_path = config;
        if (!output.empty()) {
            options.output = output;
        }
        auto cfg = RunConfig::from_file(options.config_path);
        auto path = output_path(options, cfg);
        auto table = run_command(options, cfg);
        write_csv_atomic(table, path);
    } catch (const std::exception& e) {
        std::cerr << "tiltprice: error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return 0;
}

} // namespace tiltprice::cli
