#include "cgtrace/config.hpp"

#include <fstream>
#include <sstream>

#include "cgtrace/errors.hpp"

namespace cgtrace {

std::string Attack::name() const {
    std::ostringstream out;
    switch (kind) {
        case Kind::none: return "none";
        case Kind::jpeg: out << "jpeg" << static_cast<int>(level); break;
        case Kind::gauss: out << "gauss" << level; break;
        case Kind::salt_pepper: out << "sp" << level; break;
    }
    return out.str();
}

std::vector<Attack> parse_attack_grid(const std::string& text) {
    std::vector<Attack> grid;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        const size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw UsageError("attack grid: expected kind:level, got '" + item + "'");
        const std::string kind = item.substr(0, colon);
        double level;
        try {
            level = std::stod(item.substr(colon + 1));
        } catch (const std::exception&) {
            throw UsageError("attack grid: bad level in '" + item + "'");
        }
        Attack a;
        a.level = level;
        if (kind == "jpeg") {
            a.kind = Attack::Kind::jpeg;
            if (level < 1 || level > 100) throw UsageError("attack grid: jpeg QF out of range");
        } else if (kind == "gauss") {
            a.kind = Attack::Kind::gauss;
            if (level < 0) throw UsageError("attack grid: negative noise variance");
        } else if (kind == "sp") {
            a.kind = Attack::Kind::salt_pepper;
            if (level < 0 || level > 1) throw UsageError("attack grid: density out of [0,1]");
        } else {
            throw UsageError("attack grid: unknown attack '" + kind + "'");
        }
        grid.push_back(a);
    }
    return grid;
}

void RunConfig::validate() const {
    if (lr <= 0) throw UsageError("config: lr must be positive");
    if (batch_size < 1) throw UsageError("config: batch_size must be >= 1");
    if (max_epochs < 1) throw UsageError("config: max_epochs must be >= 1");
    if (cutoff < 0) throw UsageError("config: cutoff must be >= 0");
    if (flip_p < 0 || flip_p > 1) throw UsageError("config: flip_p must be in [0,1]");
    if (lambda_l1 < 0 || alpha_adv < 0) throw UsageError("config: loss weights must be >= 0");
    if (segment_k < 1) throw UsageError("config: segment_k must be >= 1");
    if (early_stop_patience < 0) throw UsageError("config: early_stop_patience must be >= 0");
    if (image_size < 8 || image_size % 2 != 0)
        throw UsageError("config: image_size must be even and >= 8");
    if (attention != "both" && attention != "swapped" && attention != "channel" &&
        attention != "spatial" && attention != "none")
        throw UsageError("config: unknown attention mode '" + attention + "'");
    if (ablation != "three" && ablation != "no-renderer" && ablation != "no-highpass")
        throw UsageError("config: unknown ablation mode '" + ablation + "'");
    parse_attack_grid(robustness_grid);
}

std::string RunConfig::serialize() const {
    std::ostringstream out;
    out.precision(17);
    out << "seed=" << seed << '\n'
        << "lr=" << lr << '\n'
        << "batch_size=" << batch_size << '\n'
        << "max_epochs=" << max_epochs << '\n'
        << "cutoff=" << cutoff << '\n'
        << "flip_p=" << flip_p << '\n'
        << "attention=" << attention << '\n'
        << "ablation=" << ablation << '\n'
        << "lambda_l1=" << lambda_l1 << '\n'
        << "alpha_adv=" << alpha_adv << '\n'
        << "segment_k=" << segment_k << '\n'
        << "early_stop_patience=" << early_stop_patience << '\n'
        << "image_size=" << image_size << '\n'
        << "robustness_grid=" << robustness_grid << '\n';
    return out.str();
}

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // trim + skip comments/blank lines
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "lr") cfg.lr = std::stod(value);
            else if (key == "batch_size") cfg.batch_size = std::stoi(value);
            else if (key == "max_epochs") cfg.max_epochs = std::stoi(value);
            else if (key == "cutoff") cfg.cutoff = std::stoi(value);
            else if (key == "flip_p") cfg.flip_p = std::stod(value);
            else if (key == "attention") cfg.attention = value;
            else if (key == "ablation") cfg.ablation = value;
            else if (key == "lambda_l1") cfg.lambda_l1 = std::stod(value);
            else if (key == "alpha_adv") cfg.alpha_adv = std::stod(value);
            else if (key == "segment_k") cfg.segment_k = std::stoi(value);
            else if (key == "early_stop_patience") cfg.early_stop_patience = std::stoi(value);
            else if (key == "image_size") cfg.image_size = std::stoi(value);
            else if (key == "robustness_grid") cfg.robustness_grid = value;
            else throw UsageError("config: unknown key '" + key + "'");
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception&) {
            throw UsageError("config: bad value for key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void RunConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config: " + path);
    out << serialize();
    if (!out) throw IoError("failed writing config: " + path);
}

}  // namespace cgtrace
