#include <cstdio>

#include "darkspace/acceptance.hpp"

int main() {
    const auto results = darkspace::run_acceptance();
    int failed = 0;
    for (const auto& r : results) {
        std::printf("%s criterion %d: %s | expected %s | observed %s | %.1f s\n",
                    r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.expected.c_str(),
                    r.observed.c_str(), r.seconds);
        if (!r.pass) ++failed;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed,
                results.size());
    return failed == 0 ? 0 : 1;
}
