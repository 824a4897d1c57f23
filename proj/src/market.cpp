#include "tiltprice/market.hpp"

#include "tiltprice/errors.hpp"
#include "tiltprice/hash.hpp"
#include "tiltprice/philox.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace tiltprice {

std::string hex64(std::uint64_t value)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << value;
    return os.str();
}

namespace {

bool sigma_positive_on(const Coefficient& sigma, const StateInterval& E)
{
    if (sigma.kind == Coefficient::Kind::constant) {
        return sigma.c > 0.0;
    }
    return (sigma.c > 0.0 && E.lo >= 0.0) || (sigma.c < 0.0 && E.hi <= 0.0);
}

// lambda = mu / sigma is monotone on E for these coefficient forms, so its
// supremum is decided by the endpoint limits.
bool lambda_bounded_on(const Coefficient& mu, const Coefficient& sigma,
                       const StateInterval& E)
{
    using Kind = Coefficient::Kind;
    if (mu.c == 0.0 || mu.kind == sigma.kind) {
        return true;
    }
    if (mu.kind == Kind::proportional) {
        return std::isfinite(E.lo) && std::isfinite(E.hi);
    }
    return E.lo > 0.0 || E.hi < 0.0;
}

void append_coefficient(std::ostringstream& os, const char* name,
                        const Coefficient& c)
{
    os << name << '=' << (c.kind == Coefficient::Kind::constant ? 'c' : 'p')
       << std::hexfloat << c.c << std::defaultfloat << ';';
}

double clamp_into(double y, const StateInterval& E)
{
    if (std::isnan(y)) {
        return y;
    }
    if (y <= E.lo) {
        return std::nextafter(E.lo, E.hi);
    }
    if (y >= E.hi) {
        return std::nextafter(E.hi, E.lo);
    }
    return y;
}

struct PathResult {
    double y_T;
    double I2;
    double IW;
    std::size_t clamps;
};

PathResult simulate_path(const BasisRiskModel& model, Measure measure,
                         std::size_t n_steps, std::uint64_t seed,
                         std::uint64_t path)
{
    PathNormalStream normals(seed, path);
    const double dt = model.T / static_cast<double>(n_steps);
    const double sqrt_dt = std::sqrt(dt);
    double y = model.y0;
    double I2 = 0.0;
    double IW = 0.0;
    std::size_t clamps = 0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double dW = sqrt_dt * normals.next();
        const double lam = model.lambda(y);
        const double vol = model.a(y);
        double drift = model.b(y);
        if (measure == Measure::pricing) {
            drift -= lam * vol;
        }
        I2 += lam * lam * dt;
        IW += lam * dW;
        y += drift * dt + vol * dW;
        if (!model.E.contains(y)) {
            if (std::isnan(y)) {
                throw NumericalError("simulated state became NaN");
            }
            y = clamp_into(y, model.E);
            ++clamps;
        }
    }
    return {y, I2, IW, clamps};
}

} // namespace

void BasisRiskModel::validate() const
{
    if (!(E.lo < E.hi) || std::isnan(E.lo) || std::isnan(E.hi)) {
        throw DomainError("state interval E must satisfy lo < hi");
    }
    if (!E.contains(y0)) {
        std::ostringstream os;
        os << "initial state y0=" << y0 << " is outside E=(" << E.lo << ", "
           << E.hi << ")";
        throw DomainError(os.str());
    }
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw DomainError("horizon T must be positive and finite");
    }
    if (!(std::abs(rho) <= 1.0)) {
        throw DomainError("correlation rho must lie in [-1, 1]");
    }
    for (const Coefficient* c : {&mu, &sigma, &b, &a}) {
        if (!std::isfinite(c->c)) {
            throw DomainError("model coefficients must be finite");
        }
    }
    if (!sigma_positive_on(sigma, E)) {
        throw DomainError("sigma(y) must be positive on E");
    }
    if (!lambda_bounded_on(mu, sigma, E)) {
        throw DomainError("market price of risk mu/sigma is unbounded on E");
    }
}

std::uint64_t BasisRiskModel::path_hash() const
{
    std::ostringstream os;
    append_coefficient(os, "mu", mu);
    append_coefficient(os, "sigma", sigma);
    append_coefficient(os, "b", b);
    append_coefficient(os, "a", a);
    os << std::hexfloat << "y0=" << y0 << ";T=" << T << ";E=" << E.lo << ','
       << E.hi;
    return fnv1a64(os.str());
}

BasisRiskModel gbm_example_model()
{
    BasisRiskModel m;
    m.mu = Coefficient::constant(0.08);
    m.sigma = Coefficient::constant(0.2);
    m.b = Coefficient::proportional(0.03);
    m.a = Coefficient::proportional(0.3);
    m.rho = 0.0;
    m.y0 = 1.0;
    m.T = 1.0;
    m.E = {0.0, std::numeric_limits<double>::infinity()};
    return m;
}

unsigned default_worker_count()
{
    if (const char* env = std::getenv("WORKER_COUNT")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

PathBatch simulate(const BasisRiskModel& model, const SimulationSettings& settings)
{
    model.validate();
    if (settings.n_paths < 1 || settings.n_steps < 1) {
        throw DomainError("simulation needs n_paths >= 1 and n_steps >= 1");
    }
    const std::size_t n = settings.n_paths;

    PathBatch batch;
    batch.y_T.resize(n);
    batch.I2.resize(n);
    batch.IW.resize(n);
    batch.n_paths = n;
    batch.n_steps = settings.n_steps;
    batch.seed = settings.seed;
    batch.model_hash = model.path_hash();
    batch.measure = settings.measure;

    unsigned workers = settings.workers ? settings.workers : default_worker_count();
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, std::max<std::size_t>(1, n / 256)));
    workers = std::max(1u, workers);

    std::vector<std::size_t> clamps(workers, 0);
    std::vector<std::exception_ptr> failures(workers);
    auto run_range = [&](unsigned w, std::size_t begin, std::size_t end) {
        try {
            for (std::size_t i = begin; i < end; ++i) {
                auto r = simulate_path(model, settings.measure, settings.n_steps,
                                       settings.seed, i);
                batch.y_T[i] = r.y_T;
                batch.I2[i] = r.I2;
                batch.IW[i] = r.IW;
                clamps[w] += r.clamps;
            }
        } catch (...) {
            failures[w] = std::current_exception();
        }
    };

    if (workers == 1) {
        run_range(0, 0, n);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            std::size_t begin = n * w / workers;
            std::size_t end = n * (w + 1) / workers;
            threads.emplace_back(run_range, w, begin, end);
        }
        for (auto& t : threads) {
            t.join();
        }
    }
    for (auto& f : failures) {
        if (f) {
            std::rethrow_exception(f);
        }
    }
    for (std::size_t c : clamps) {
        batch.clamp_count += c;
    }
    const double total_steps = static_cast<double>(n)
        * static_cast<double>(settings.n_steps);
    if (static_cast<double>(batch.clamp_count) > kMaxClampFraction * total_steps) {
        std::ostringstream os;
        os << "batch rejected: " << batch.clamp_count
           << " steps left the state interval (limit "
           << kMaxClampFraction * 100.0 << "% of " << total_steps << ")";
        throw NumericalError(os.str());
    }
    return batch;
}

std::vector<double> log_stochastic_exponential(const PathBatch& batch, double rho)
{
    const double half_rho2 = 0.5 * rho * rho;
    std::vector<double> out(batch.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = -rho * batch.IW[i] - half_rho2 * batch.I2[i];
    }
    return out;
}

std::vector<double> stochastic_exponential(const PathBatch& batch, double rho)
{
    auto out = log_stochastic_exponential(batch, rho);
    for (double& v : out) {
        v = std::exp(v);
    }
    return out;
}

std::vector<double> q_measure_weights(const PathBatch& batch)
{
    return stochastic_exponential(batch, 1.0);
}

std::string to_string(Measure m)
{
    return m == Measure::physical ? "P" : "Q";
}

//---------------------------------------------------------------------------//
// CSV import / export
//---------------------------------------------------------------------------//

void write_batch_csv(const PathBatch& batch, const std::filesystem::path& path)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) {
            throw ConfigError("cannot open " + tmp.string() + " for writing");
        }
        out << "# tiltprice-pathbatch v1 seed=" << batch.seed
            << " n_paths=" << batch.n_paths << " n_steps=" << batch.n_steps
            << " model_hash=" << hex64(batch.model_hash)
            << " scheme=" << batch.scheme << " measure=" << to_string(batch.measure)
            << " clamps=" << batch.clamp_count << '\n';
        out << "y_T,I2,IW\n";
        char line[128];
        for (std::size_t i = 0; i < batch.size(); ++i) {
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", batch.y_T[i],
                          batch.I2[i], batch.IW[i]);
            out << line;
        }
        if (!out) {
            throw ConfigError("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

PathBatch read_batch_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open path batch " + path.string());
    }
    std::string meta;
    std::getline(in, meta);
    const std::string magic = "# tiltprice-pathbatch v1";
    if (meta.rfind(magic, 0) != 0) {
        throw ConfigError(path.string() + ": missing path batch metadata line");
    }
    PathBatch batch;
    std::istringstream ms(meta.substr(magic.size()));
    std::string field;
    bool have_paths = false;
    while (ms >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        std::string key = field.substr(0, eq);
        std::string val = field.substr(eq + 1);
        try {
            if (key == "seed") {
                batch.seed = std::stoull(val);
            } else if (key == "n_paths") {
                batch.n_paths = std::stoull(val);
                have_paths = true;
            } else if (key == "n_steps") {
                batch.n_steps = std::stoull(val);
            } else if (key == "model_hash") {
                batch.model_hash = std::stoull(val, nullptr, 16);
            } else if (key == "scheme") {
                batch.scheme = val;
            } else if (key == "measure") {
                batch.measure = val == "Q" ? Measure::pricing : Measure::physical;
            } else if (key == "clamps") {
                batch.clamp_count = std::stoull(val);
            }
        } catch (const std::exception&) {
            throw ConfigError(path.string() + ": bad metadata field " + field);
        }
    }
    if (!have_paths) {
        throw ConfigError(path.string() + ": metadata lacks n_paths");
    }
    std::string header;
    std::getline(in, header);
    if (header != "y_T,I2,IW") {
        throw ConfigError(path.string() + ": expected header y_T,I2,IW");
    }
    batch.y_T.reserve(batch.n_paths);
    batch.I2.reserve(batch.n_paths);
    batch.IW.reserve(batch.n_paths);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        double v[3];
        char* p = line.data();
        for (int k = 0; k < 3; ++k) {
            char* end = nullptr;
            v[k] = std::strtod(p, &end);
            if (end == p || (k < 2 && *end != ',')) {
                throw ConfigError(path.string() + ": malformed row: " + line);
            }
            p = end + 1;
        }
        batch.y_T.push_back(v[0]);
        batch.I2.push_back(v[1]);
        batch.IW.push_back(v[2]);
    }
    if (batch.y_T.size() != batch.n_paths) {
        std::ostringstream os;
        os << path.string() << ": expected " << batch.n_paths << " rows, found "
           << batch.y_T.size();
        throw ConfigError(os.str());
    }
    return batch;
}

} // namespace tiltprice
