#include "detail.hpp"

#include "cqd/errors.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace cqd::runner {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("sha256: cannot read " + p.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256: digest initialisation failed");
    }
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidArgument*>(&e)) return exit_config;
    if (dynamic_cast<const ValidationFailure*>(&e)) return exit_validation;
    return exit_numeric;
}

bool ValidationReport::all_passed() const {
    if (checks.empty()) return false;
    for (const auto& c : checks) {
        if (!c.passed) return false;
    }
    return true;
}

namespace detail {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

OutputStage::OutputStage(const fs::path& target) : target_(target) {
    std::error_code ec;
    if (fs::exists(target_, ec) && !fs::is_directory(target_, ec)) {
        throw ConfigError("output.dir: '" + target_.string() + "' exists and is not a directory");
    }
    const fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
    fs::create_directories(parent, ec);
    staging_ = parent / ("." + target_.filename().string() + ".staging." + std::to_string(::getpid()));
    fs::remove_all(staging_, ec);
    if (!fs::create_directories(staging_, ec) || ec) {
        throw ConfigError("output.dir: cannot create files under '" + parent.string() + "'");
    }
}

OutputStage::~OutputStage() {
    if (!committed_) {
        std::error_code ec;
        fs::remove_all(staging_, ec);
    }
}

fs::path OutputStage::path(const std::string& name) { return staging_ / name; }

void OutputStage::write(const std::string& name, const std::string& content) {
    std::ofstream out(staging_ / name, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw std::runtime_error("cannot write " + (staging_ / name).string());
    files_.push_back(name);
}

std::vector<fs::path> OutputStage::commit(json manifest) {
    json files = json::array();
    for (const auto& f : files_) {
        files.push_back({{"name", f}, {"bytes", fs::file_size(staging_ / f)}, {"sha256", sha256_file(staging_ / f)}});
    }
    manifest["files"] = files;
    manifest["finished"] = iso_timestamp();
    write("manifest.json", manifest.dump(2) + "\n");

    fs::create_directories(target_);
    std::vector<fs::path> out;
    for (const auto& f : files_) {
        fs::rename(staging_ / f, target_ / f);
        out.push_back(target_ / f);
    }
    committed_ = true;
    std::error_code ec;
    fs::remove_all(staging_, ec);
    return out;
}

json manifest_base(const ExperimentConfig& cfg, const std::string& command, const std::string& started) {
    json m;
    m["tool"] = "cqd";
    m["version"] = tool_version;
    m["command"] = command;
    m["started"] = started;
    m["config"] = cfg.source;
    m["seeds"] = {{"master", cfg.ensemble.seed},
                  {"derivation", "splitmix64 chain over (master, mode index, trajectory, branch)"}};
    m["warnings"] = json::array();
    return m;
}

std::string series_csv(const PointResult& r) {
    const auto& s = r.series;
    const bool have_d = s.d_complex.has_value();
    const bool have_err = s.D_err.has_value();
    const bool have_fac = r.factorized.has_value();
    std::ostringstream os;
    os << "t,h,D,log10_D";
    if (have_d) os << ",d_re,d_im";
    if (have_err) os << ",D_err";
    if (have_fac) os << ",D_factorized,log10_D_factorized";
    os << '\n';
    const double ln10 = std::log(10.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << fmt(s.times[i]) << ',' << fmt(s.fields[i]) << ',' << fmt(s.D[i]) << ',' << fmt(s.log_D[i] / ln10);
        if (have_d) os << ',' << fmt((*s.d_complex)[i].real()) << ',' << fmt((*s.d_complex)[i].imag());
        if (have_err) os << ',' << fmt((*s.D_err)[i]);
        if (have_fac) os << ',' << fmt(r.factorized->D[i]) << ',' << fmt(r.factorized->log_D[i] / ln10);
        os << '\n';
    }
    return os.str();
}

std::string modes_csv(const DecoherenceSeries& s, const std::vector<double>& snapshot_h) {
    std::ostringstream os;
    os << "k,F_k,snapshot_h\n";
    if (s.per_mode_F.empty() || s.fields.empty()) return os.str();
    const int N = static_cast<int>(2 * s.per_mode_F.size());
    for (double h : snapshot_h) {
        std::size_t j = 0;
        for (std::size_t i = 1; i < s.fields.size(); ++i) {
            if (std::abs(s.fields[i] - h) < std::abs(s.fields[j] - h)) j = i;
        }
        for (std::size_t mi = 0; mi < s.per_mode_F.size(); ++mi) {
            const KMode mode = make_mode(static_cast<int>(mi) + 1, N);
            os << fmt(mode.k) << ',' << fmt(s.per_mode_F[mi][j]) << ',' << fmt(h) << '\n';
        }
    }
    return os.str();
}

json with_value(const json& doc, const std::string& path, const json& value) {
    json out = doc;
    json* cur = &out;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (!cur->is_object() || !cur->contains(part)) throw ConfigError(path + ": unknown key");
        cur = &(*cur)[part];
    }
    *cur = value;
    return out;
}

} // namespace detail
} // namespace cqd::runner
