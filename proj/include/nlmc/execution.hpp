#pragma once

namespace nlmc {

// Selects the serial reference kernel or its OpenMP counterpart. Both must
// produce identical results; the serial path is what the tests trust.
enum class Execution { serial, parallel };

}  // namespace nlmc
