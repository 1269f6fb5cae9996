#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "mcflow/conditions.hpp"
#include "mcflow/config.hpp"
#include "mcflow/grid.hpp"
#include "mcflow/nonlinearity.hpp"
#include "mcflow/solver.hpp"
#include "mcflow/verifier.hpp"

namespace mcflow {

nlohmann::json to_json(const PStepRecord& r);
nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const ConditionReport& r);
nlohmann::json to_json(const VerificationReport& r);
nlohmann::json to_json(const StampacchiaCheck& r);

/// Solution profile: plain columnar CSV at 17 significant digits with a
/// commented header carrying the grid and nonlinearity so a profile can be
/// re-verified standalone. Radial columns r,u,z,f,residual; tensor columns
/// x,y,u,zx,zy,f,residual (in-mask nodes only).
void write_profile(const std::string& path, const ScalarField& u, const FluxField& z,
                   const ScalarField& f, const ScalarField& resid, const NonlinearTerm& h);

struct LoadedProfile {
    GridPtr grid;
    ScalarField u;
    FluxField z;
    ScalarField f;
    ScalarField resid;
    NonlinearTerm h = NonlinearTerm::identity_one();
};

LoadedProfile read_profile(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mcflow
