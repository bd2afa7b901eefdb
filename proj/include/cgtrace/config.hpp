#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cgtrace {

// One postprocessing attack of the robustness grid.
struct Attack {
    enum class Kind { none, jpeg, gauss, salt_pepper } kind = Kind::none;
    double level = 0.0;  // QF for jpeg, variance for gauss, density for salt-pepper

    std::string name() const;
};

// Parse "jpeg:95,gauss:0.01,sp:0.02" into the attack list.
std::vector<Attack> parse_attack_grid(const std::string& text);

// Flat key=value run configuration; unknown keys are rejected.
struct RunConfig {
    uint64_t seed = 42;
    double lr = 0.0008;
    int batch_size = 64;
    int max_epochs = 400;
    int cutoff = 30;       // high-pass radius
    double flip_p = 0.3;
    std::string attention = "both";
    std::string ablation = "three";
    double lambda_l1 = 1.0;
    double alpha_adv = 0.01;
    int segment_k = 8;
    int early_stop_patience = 0;
    int image_size = 256;
    std::string robustness_grid =
        "jpeg:95,jpeg:85,jpeg:75,gauss:0.01,gauss:0.02,sp:0.01,sp:0.02";

    void validate() const;
    std::string serialize() const;

    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::string& path);
    void save(const std::string& path) const;
};

}  // namespace cgtrace
