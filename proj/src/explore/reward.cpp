#include "explore/reward.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace goblend::explore {

double similarity_term(double h, double t) {
    const double d = 1.0 - std::abs(h - t);
    return d * d;
}

double target_at(const std::vector<double>& target, std::size_t i) {
    return target[std::min(i, target.size() - 1)];
}

double trace_similarity(const std::vector<double>& agent, const std::vector<double>& target) {
    if (agent.empty()) throw ValidationError("trace similarity needs at least one window");
    if (target.empty()) throw ValidationError("target trace is empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < agent.size(); ++i) {
        const double h = agent[i];
        const double t = target_at(target, i);
        if (!(h >= 0.0 && h <= 1.0) || !(t >= 0.0 && t <= 1.0)) {
            throw ValidationError("trace values must lie in [0,1]");
        }
        sum += similarity_term(h, t);
    }
    return sum / static_cast<double>(agent.size());
}

double blend(double r_experience, double r_behavior, double lambda) {
    return lambda * r_experience + (1.0 - lambda) * r_behavior;
}

}  // namespace goblend::explore
