#pragma once

#include <stdexcept>

namespace ridesim {

// Invalid configuration value, unknown key, or bad command input.
struct ConfigError : std::runtime_error { using std::runtime_error::runtime_error; };

// Malformed input file: bad header, bad field, dangling reference.
struct SchemaError : std::runtime_error { using std::runtime_error::runtime_error; };

// Well-formed input that violates a model invariant (e.g. a disconnected road graph).
struct ValidationError : std::runtime_error { using std::runtime_error::runtime_error; };

// Unknown node or agent id.
struct LookupError : std::runtime_error { using std::runtime_error::runtime_error; };

// Operation applied to an agent in the wrong state.
struct StateError : std::runtime_error { using std::runtime_error::runtime_error; };

// Non-finite value fed into a numeric routine.
struct ComputationError : std::runtime_error { using std::runtime_error::runtime_error; };

// Bad input list to a statistics routine.
struct InputError : std::runtime_error { using std::runtime_error::runtime_error; };

// Demand generation could not satisfy its constraints on the given graph.
struct GenerationError : std::runtime_error { using std::runtime_error::runtime_error; };

// Calibration produced no observations to pool.
struct CalibrationError : std::runtime_error { using std::runtime_error::runtime_error; };

// Bug guard: the simulation reached a state that must be impossible.
struct InternalError : std::logic_error { using std::logic_error::logic_error; };

}  // namespace ridesim
