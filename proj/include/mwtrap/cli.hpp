#pragma once

#include <string>
#include <vector>

#include "mwtrap/fields.hpp"

namespace mwtrap::cli {

struct ElectrodeWidth {
    std::string name;
    double design_um;
    double measured_um;
};

/// Paper-default electrode model: the two-wire field model, an equivalent
/// wire-segment layout (1 m wires at x = -L and x = +L carrying the stub
/// currents in opposite directions), and the designed/measured electrode
/// widths of the trap's central region.
struct DefaultLayout {
    fields::TwoWireModel model;
    fields::WireLayout layout;
    std::vector<ElectrodeWidth> electrode_widths;
};

DefaultLayout default_layout();

/// Entry point behind the mwtrap binary. Returns 0 on success, 1 on domain or
/// convergence errors, 2 on I/O, parse, and usage errors.
int run(int argc, const char* const* argv);

/// Convenience overload for in-process invocation.
int run(const std::vector<std::string>& args);

}  // namespace mwtrap::cli
