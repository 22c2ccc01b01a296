// SPDX-License-Identifier: Apache-2.0
//
// Built with GAZE_INVERT_TIEBREAK so boundary ties resolve toward the higher
// region id. The verify suites must notice: the TopK suite fails against its
// full-sort oracle (it includes crafted ties) while the other suites, whose
// inputs have no exact score ties, still pass. Exits 0 only if the fault is
// detected in exactly that pattern.
#include <cstdio>
#include <sstream>
#include <string>

#include "gaze/commands.hpp"

namespace {

bool contains(const std::string& text, const std::string& needle) {
    return text.find(needle) != std::string::npos;
}

}  // namespace

int main() {
    std::ostringstream capture;
    const int status = gaze::cmd_verify(capture);
    const std::string out = capture.str();
    std::fputs(out.c_str(), stdout);

    bool ok = true;
    const auto expect = [&ok](bool condition, const char* what) {
        if (!condition) {
            ok = false;
            std::printf("fault injection: expectation missed: %s\n", what);
        }
    };
    expect(status != 0, "verify exits nonzero under the inverted tie rule");
    expect(contains(out, "suite topk_oracle: FAIL"), "TopK suite fails");
    expect(contains(out, "suite full_selection_equivalence: PASS"),
           "full-selection suite unaffected");
    expect(contains(out, "suite gradient_check: PASS"), "gradient suite unaffected");
    expect(contains(out, "suite tiling_partition: PASS"), "partition suite unaffected");
    expect(contains(out, "suite cost_worked_example: PASS"), "cost suite unaffected");
    expect(contains(out, "verify: FAILURES"), "failure trailer printed");

    if (ok) std::puts("fault injection: tie-rule fault detected as designed");
    return ok ? 0 : 1;
}
