#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrep/ipm.hpp"
#include "qrep/linear_map.hpp"

namespace qrep {
namespace instance {

// Malformed or schema-violating instance; `what()` names the line or field.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Overrides {
    std::optional<std::string> formulation;
    std::optional<double> gap_tol, feas_tol;
    std::optional<int> max_iter;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
};

struct NamedMap {
    std::string label;
    LinearMap map;
};

// A parsed instance file. Either a raw conic problem or an application
// spec (builder name, parameters, formulation). The JSON payload is kept
// in serialized form so the header stays free of the JSON library.
struct Instance {
    std::string id;
    std::uint64_t seed = 0;
    std::string application;  // empty for a raw problem
    std::string formulation;
    std::string payload;
    ipm::Settings settings;
};

Instance parse(const std::string& text, const std::string& source = "<input>");
Instance load(const std::string& path);
void apply(Instance& inst, const Overrides& o);

ipm::ConicProblem build(const Instance& inst);
// Linear maps declared in cone records, for positivity checks.
std::vector<NamedMap> declared_maps(const Instance& inst);

// Application problem from a parameter object in JSON text.
ipm::ConicProblem build_application(const std::string& application, const std::string& formulation,
                                    const std::string& params_json, std::uint64_t seed);

}  // namespace instance
}  // namespace qrep
