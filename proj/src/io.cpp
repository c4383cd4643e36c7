#include "wigct/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace wigct {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(where + ": bad numeric field '" + s + "'");
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) out.push_back(cur);
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

double require_number(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw IoError(where + ": missing field '" + key + "'");
    if (!j[key].is_number()) throw IoError(where + ": field '" + key + "' must be a number");
    return j[key].get<double>();
}

} // namespace

Json params_to_json(const GaussianParams& p) {
    Json j;
    j["n_thermal"] = p.n_thermal;
    j["r"] = p.squeeze.r;
    j["theta_rad"] = p.squeeze.theta;
    j["alpha_re"] = p.alpha.real();
    j["alpha_im"] = p.alpha.imag();
    return j;
}

GaussianParams params_from_json(const Json& j) {
    GaussianParams p(require_number(j, "n_thermal", "state"),
                     SqueezeParam(require_number(j, "r", "state"),
                                  require_number(j, "theta_rad", "state")),
                     Complex(require_number(j, "alpha_re", "state"),
                             require_number(j, "alpha_im", "state")));
    p.validate();
    return p;
}

Json chain_to_json(const ChainConfig& c) {
    Json j;
    j["gamma_t"] = c.gamma_t;
    j["eta0_db"] = c.eta0_db;
    j["eta1_db"] = c.eta1_db;
    j["f0_hz"] = c.f0_hz;
    j["fwhm_hz"] = c.fwhm_hz;
    return j;
}

ChainConfig chain_from_json(const Json& j) {
    ChainConfig c;
    c.gamma_t = require_number(j, "gamma_t", "chain");
    c.eta0_db = require_number(j, "eta0_db", "chain");
    c.eta1_db = require_number(j, "eta1_db", "chain");
    c.f0_hz = require_number(j, "f0_hz", "chain");
    c.fwhm_hz = require_number(j, "fwhm_hz", "chain");
    c.validate();
    return c;
}

Json calibration_to_json(const CalibrationCurves& c) {
    Json j;
    j["n_of_mu"] = c.n_of_mu;
    j["var_of_sigma2"] = c.var_of_sigma2;
    j["mu_min"] = c.mu_min;
    j["mu_max"] = c.mu_max;
    j["sigma2_min"] = c.sigma2_min;
    j["sigma2_max"] = c.sigma2_max;
    j["n_residual"] = c.n_residual;
    j["var_residual"] = c.var_residual;
    j["monotone"] = c.monotone;
    return j;
}

CalibrationCurves calibration_from_json(const Json& j) {
    CalibrationCurves c;
    const auto& nm = j.at("n_of_mu");
    const auto& vs = j.at("var_of_sigma2");
    if (nm.size() != 4 || vs.size() != 2)
        throw IoError("calibration: n_of_mu needs 4 coefficients, var_of_sigma2 needs 2");
    for (int i = 0; i < 4; ++i) c.n_of_mu[i] = nm[i].get<double>();
    for (int i = 0; i < 2; ++i) c.var_of_sigma2[i] = vs[i].get<double>();
    c.mu_min = require_number(j, "mu_min", "calibration");
    c.mu_max = require_number(j, "mu_max", "calibration");
    c.sigma2_min = require_number(j, "sigma2_min", "calibration");
    c.sigma2_max = require_number(j, "sigma2_max", "calibration");
    c.n_residual = j.value("n_residual", 0.0);
    c.var_residual = j.value("var_residual", 0.0);
    c.monotone = j.value("monotone", true);
    return c;
}

Json voigt_to_json(const VoigtParams& p) {
    Json j;
    j["mu_hz"] = p.mu_hz;
    j["sigma2"] = p.sigma2;
    j["gamma_hz"] = p.gamma_hz;
    j["gamma_c_hz"] = p.gamma_c_hz;
    j["asym_rad"] = p.asym_rad;
    j["baseline_re"] = p.baseline.real();
    j["baseline_im"] = p.baseline.imag();
    return j;
}

VoigtParams voigt_from_json(const Json& j) {
    VoigtParams p;
    p.mu_hz = require_number(j, "mu_hz", "voigt");
    p.sigma2 = require_number(j, "sigma2", "voigt");
    p.gamma_hz = require_number(j, "gamma_hz", "voigt");
    p.gamma_c_hz = require_number(j, "gamma_c_hz", "voigt");
    p.asym_rad = j.value("asym_rad", 0.0);
    p.baseline = Complex(j.value("baseline_re", 0.0), j.value("baseline_im", 0.0));
    return p;
}

Json read_json_file(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
    auto out = open_out(path);
    out << "f_hz,re_s11,im_s11\n";
    for (const auto& pt : s)
        out << fmt_double(pt.f_hz) << ',' << fmt_double(pt.s11.real()) << ','
            << fmt_double(pt.s11.imag()) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || split_csv(line) != std::vector<std::string>{"f_hz", "re_s11", "im_s11"})
        throw IoError(path.string() + ": line 1: expected header f_hz,re_s11,im_s11");
    Spectrum s;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3)
            throw IoError(path.string() + ": line " + std::to_string(line_no) + ": expected 3 fields");
        const std::string where = path.string() + ": line " + std::to_string(line_no);
        s.push_back(SpectrumPoint{parse_double(fields[0], where),
                                  Complex(parse_double(fields[1], where), parse_double(fields[2], where))});
    }
    return s;
}

void write_grid_csv(const std::filesystem::path& path, const WignerGrid& grid) {
    auto out = open_out(path);
    out << "M,extent\n" << grid.size_m << ',' << fmt_double(grid.extent) << '\n';
    for (int i = 0; i < grid.size_m; ++i) {
        for (int j = 0; j < grid.size_m; ++j) {
            if (j) out << ',';
            out << fmt_double(grid.values(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

WignerGrid read_grid_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || split_csv(line) != std::vector<std::string>{"M", "extent"})
        throw IoError(path.string() + ": line 1: expected header M,extent");
    if (!std::getline(in, line)) throw IoError(path.string() + ": missing M,extent values");
    const auto dims = split_csv(line);
    if (dims.size() != 2) throw IoError(path.string() + ": line 2: expected M,extent values");
    const int m = static_cast<int>(parse_double(dims[0], path.string() + ": line 2"));
    const double extent = parse_double(dims[1], path.string() + ": line 2");
    WignerGrid grid(m, extent);
    for (int i = 0; i < m; ++i) {
        if (!std::getline(in, line))
            throw IoError(path.string() + ": truncated grid at row " + std::to_string(i));
        const auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) != m)
            throw IoError(path.string() + ": row " + std::to_string(i) + ": expected " +
                          std::to_string(m) + " values");
        for (int j = 0; j < m; ++j)
            grid.values(i, j) = parse_double(fields[j], path.string() + ": row " + std::to_string(i));
    }
    return grid;
}

void write_grid_pgm16(const std::filesystem::path& path, const WignerGrid& grid) {
    const double lo = grid.values.minCoeff();
    const double hi = grid.values.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;

    auto out = open_out(path);
    out << "P5\n" << grid.size_m << ' ' << grid.size_m << "\n65535\n";
    // Image rows top to bottom = p descending; columns = x ascending.
    for (int row = 0; row < grid.size_m; ++row) {
        const int jp = grid.size_m - 1 - row;
        for (int ix = 0; ix < grid.size_m; ++ix) {
            const double t = (grid.values(ix, jp) - lo) / span;
            const auto v = static_cast<unsigned>(std::lround(t * 65535.0));
            const unsigned char bytes[2] = {static_cast<unsigned char>(v >> 8),
                                            static_cast<unsigned char>(v & 0xff)};
            out.write(reinterpret_cast<const char*>(bytes), 2);
        }
    }
    if (!out) throw IoError("failed writing " + path.string());

    Json scale;
    scale["min"] = lo;
    scale["max"] = hi;
    scale["maxval"] = 65535;
    scale["extent"] = grid.extent;
    scale["size_m"] = grid.size_m;
    write_json_file(path.string() + ".json", scale);
}

void write_sinogram_csv(const std::filesystem::path& path, const Sinogram& s) {
    auto out = open_out(path);
    out << "mode," << (s.gaussian_mode ? "gaussian" : "sampled") << '\n';
    out << "bins," << s.bins << '\n';
    out << "range," << fmt_double(s.range) << '\n';
    for (size_t a = 0; a < s.angles_deg.size(); ++a) {
        out << fmt_double(s.angles_deg[a]);
        if (s.gaussian_mode) {
            out << ',' << fmt_double(s.stats[a].mean) << ',' << fmt_double(s.stats[a].variance);
        } else {
            for (int j = 0; j < s.bins; ++j) out << ',' << fmt_double(s.profiles(static_cast<int>(a), j));
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

Sinogram read_sinogram_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    Sinogram s;
    const auto header = [&](const char* key) {
        if (!std::getline(in, line)) throw IoError(path.string() + ": missing header " + key);
        const auto fields = split_csv(line);
        if (fields.size() != 2 || fields[0] != key)
            throw IoError(path.string() + ": expected header line '" + key + ",...'");
        return fields[1];
    };
    const std::string mode = header("mode");
    if (mode != "gaussian" && mode != "sampled")
        throw IoError(path.string() + ": mode must be gaussian or sampled");
    s.gaussian_mode = mode == "gaussian";
    s.bins = static_cast<int>(parse_double(header("bins"), path.string() + ": bins"));
    s.range = parse_double(header("range"), path.string() + ": range");

    std::vector<std::vector<double>> rows;
    int line_no = 3;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        const size_t expected = s.gaussian_mode ? 3 : static_cast<size_t>(s.bins) + 1;
        if (fields.size() != expected)
            throw IoError(path.string() + ": line " + std::to_string(line_no) + ": expected " +
                          std::to_string(expected) + " fields");
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields)
            row.push_back(parse_double(f, path.string() + ": line " + std::to_string(line_no)));
        rows.push_back(std::move(row));
    }
    if (s.gaussian_mode) {
        for (const auto& row : rows) {
            s.angles_deg.push_back(row[0]);
            s.stats.push_back(Marginal{row[1], row[2]});
        }
    } else {
        s.profiles.resize(static_cast<int>(rows.size()), s.bins);
        for (size_t a = 0; a < rows.size(); ++a) {
            s.angles_deg.push_back(rows[a][0]);
            for (int j = 0; j < s.bins; ++j) s.profiles(static_cast<int>(a), j) = rows[a][j + 1];
        }
    }
    return s;
}

std::vector<CalibrationSample> read_calibration_samples_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) ||
        split_csv(line) != std::vector<std::string>{"mu_hz", "sigma2", "n_mean", "n_var"})
        throw IoError(path.string() + ": line 1: expected header mu_hz,sigma2,n_mean,n_var");
    std::vector<CalibrationSample> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 4)
            throw IoError(path.string() + ": line " + std::to_string(line_no) + ": expected 4 fields");
        const std::string where = path.string() + ": line " + std::to_string(line_no);
        CalibrationSample s;
        s.voigt.mu_hz = parse_double(fields[0], where);
        s.voigt.sigma2 = parse_double(fields[1], where);
        s.voigt.gamma_hz = 1.0; // unused by calibrate
        s.voigt.gamma_c_hz = 1.0;
        s.stats.mean = parse_double(fields[2], where);
        s.stats.variance = parse_double(fields[3], where);
        out.push_back(s);
    }
    return out;
}

void write_calibration_samples_csv(const std::filesystem::path& path,
                                   const std::vector<CalibrationSample>& samples) {
    auto out = open_out(path);
    out << "mu_hz,sigma2,n_mean,n_var\n";
    for (const auto& s : samples)
        out << fmt_double(s.voigt.mu_hz) << ',' << fmt_double(s.voigt.sigma2) << ','
            << fmt_double(s.stats.mean) << ',' << fmt_double(s.stats.variance) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const unsigned char* data, size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (size_t i = 0; i < len; i += 3) {
        unsigned v = data[i] << 16;
        if (i + 1 < len) v |= data[i + 1] << 8;
        if (i + 2 < len) v |= data[i + 2];
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back(i + 1 < len ? kB64[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < len ? kB64[v & 63] : '=');
    }
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
    std::array<int, 256> lut;
    lut.fill(-1);
    for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kB64[i])] = i;
    std::vector<unsigned char> out;
    out.reserve(text.size() / 4 * 3);
    unsigned acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        const int v = lut[static_cast<unsigned char>(c)];
        if (v < 0) throw IoError("base64: invalid character");
        acc = (acc << 6) | static_cast<unsigned>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
        }
    }
    return out;
}

namespace {

std::string doubles_to_base64(const double* data, size_t count) {
    static_assert(std::endian::native == std::endian::little,
                  "model files are little-endian");
    return base64_encode(reinterpret_cast<const unsigned char*>(data), count * sizeof(double));
}

std::vector<double> base64_to_doubles(const std::string& text, size_t expected,
                                      const std::string& where) {
    const auto bytes = base64_decode(text);
    if (bytes.size() != expected * sizeof(double))
        throw IoError(where + ": payload size mismatch");
    std::vector<double> out(expected);
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

} // namespace

void write_model_json(const std::filesystem::path& path, const NNModel& m) {
    Json j;
    j["format"] = "wigct-nn";
    j["version"] = 1;
    j["angles_deg"] = m.angles_deg;
    j["dims"] = {m.w1.cols(), m.w1.rows(), m.w2.rows(), m.w3.rows()};
    const auto put = [&](const char* key, const Eigen::MatrixXd& a) {
        j[key] = doubles_to_base64(a.data(), a.size());
    };
    put("w1", m.w1);
    put("b1", m.b1);
    put("w2", m.w2);
    put("b2", m.b2);
    put("w3", m.w3);
    put("b3", m.b3);
    put("feat_mean", m.feat_mean);
    put("feat_std", m.feat_std);
    put("label_mean", m.label_mean);
    put("label_std", m.label_std);
    j["config_hash"] = m.config_hash;
    write_json_file(path, j);
}

NNModel read_model_json(const std::filesystem::path& path) {
    const Json j = read_json_file(path);
    if (j.value("format", "") != "wigct-nn" || j.value("version", 0) != 1)
        throw IoError(path.string() + ": not a version-1 model file");
    NNModel m;
    m.angles_deg = j.at("angles_deg").get<std::vector<double>>();
    const auto dims = j.at("dims").get<std::vector<long>>();
    if (dims.size() != 4) throw IoError(path.string() + ": dims must have 4 entries");
    const long n_in = dims[0], h1 = dims[1], h2 = dims[2], n_out = dims[3];
    const auto mat = [&](const char* key, long rows, long cols) {
        const auto v = base64_to_doubles(j.at(key).get<std::string>(),
                                         static_cast<size_t>(rows * cols),
                                         path.string() + ": " + key);
        Eigen::MatrixXd a(rows, cols);
        std::memcpy(a.data(), v.data(), v.size() * sizeof(double));
        return a;
    };
    m.w1 = mat("w1", h1, n_in);
    m.b1 = mat("b1", h1, 1).col(0);
    m.w2 = mat("w2", h2, h1);
    m.b2 = mat("b2", h2, 1).col(0);
    m.w3 = mat("w3", n_out, h2);
    m.b3 = mat("b3", n_out, 1).col(0);
    m.feat_mean = mat("feat_mean", n_in, 1).col(0);
    m.feat_std = mat("feat_std", n_in, 1).col(0);
    m.label_mean = mat("label_mean", n_out, 1).col(0);
    m.label_std = mat("label_std", n_out, 1).col(0);
    m.config_hash = j.value("config_hash", "");
    return m;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
    Json header;
    header["format"] = "wigct-dataset";
    header["version"] = 1;
    header["count"] = ds.features.rows();
    header["angles_deg"] = ds.angles_deg;
    header["seed"] = ds.seed;
    header["noise_mean_sigma"] = ds.noise_mean_sigma;
    header["noise_var_sigma"] = ds.noise_var_sigma;

    auto out = open_out(path);
    out << header.dump() << '\n';
    const int nf = static_cast<int>(ds.features.cols());
    for (int i = 0; i < ds.features.rows(); ++i) {
        std::vector<double> rec(nf + 5);
        for (int k = 0; k < nf; ++k) rec[k] = ds.features(i, k);
        for (int k = 0; k < 5; ++k) rec[nf + k] = ds.labels(i, k);
        out.write(reinterpret_cast<const char*>(rec.data()),
                  static_cast<std::streamsize>(rec.size() * sizeof(double)));
    }
    if (!out) throw IoError("failed writing " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": missing dataset header");
    Json header;
    try {
        header = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path.string() + ": header: " + e.what());
    }
    if (header.value("format", "") != "wigct-dataset" || header.value("version", 0) != 1)
        throw IoError(path.string() + ": not a version-1 dataset file");

    Dataset ds;
    ds.angles_deg = header.at("angles_deg").get<std::vector<double>>();
    ds.seed = header.at("seed").get<std::uint64_t>();
    ds.noise_mean_sigma = header.value("noise_mean_sigma", 0.0);
    ds.noise_var_sigma = header.value("noise_var_sigma", 0.0);
    const long count = header.at("count").get<long>();
    const int nf = 2 * static_cast<int>(ds.angles_deg.size());
    ds.features.resize(count, nf);
    ds.labels.resize(count, 5);
    std::vector<double> rec(nf + 5);
    for (long i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(rec.data()),
                static_cast<std::streamsize>(rec.size() * sizeof(double)));
        if (!in) throw IoError(path.string() + ": truncated record " + std::to_string(i));
        for (int k = 0; k < nf; ++k) ds.features(i, k) = rec[k];
        for (int k = 0; k < 5; ++k) ds.labels(i, k) = rec[nf + k];
    }
    return ds;
}

} // namespace wigct
