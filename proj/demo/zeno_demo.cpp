// zeno_demo.cpp — peak decay rates for the excited state and the equal superposition
#include <cstdio>
#include <numbers>

#include "zenoscope/analysis.hpp"

int main() {
    using namespace zenoscope;
    rates::ModelParams p;  // eps = omega_c = 1, Delta = 0.05, s = 2, T = 0
    const analysis::TauGrid grid{0.025, 5.0, 120, analysis::TauGrid::Spacing::Linear};
    const struct {
        const char* name;
        double theta;
    } states[] = {{"excited", 0.0}, {"superposition", std::numbers::pi / 2}};
    for (const auto& s : states) {
        std::printf("%s state\n  %4s %10s %12s %s\n", s.name, "G", "tau*", "Gamma_max", "anti-Zeno");
        for (double G : {1.0, 2.0, 3.0}) {
            p.bath.G = G;
            const auto curve = analysis::sample_curve(state::make_state(s.theta, 0.0), p, rates::RateMode::Effective, grid);
            const auto pk = analysis::find_peak(curve);
            const bool anti = analysis::classify_regimes(curve).has_anti_zeno();
            std::printf("  %4.1f %10.4f %12.6g %s\n", G, pk.tau_star, pk.gamma_max, anti ? "yes" : "no");
        }
    }
}
