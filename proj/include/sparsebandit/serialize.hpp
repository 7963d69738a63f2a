#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sparsebandit/design.hpp"
#include "sparsebandit/model.hpp"

namespace sparsebandit {

// An action set plus instance parameters parsed from (or destined for) the
// JSON document {dim, actions: [[...]], theta: [...], sparsity_bound,
// noise_std}.  An optional labels object {"informative": [indices]} tags the
// informative block of generated hard instances.
struct SerializedInstance {
  ActionSet actions;
  SparseInstance instance;
  std::vector<std::size_t> informative;
};

// Render the full instance document.  `informative` may be empty, in which
// case no labels field is written.
std::string instance_to_json(const ActionSet& actions, const SparseInstance& instance,
                             const std::vector<std::size_t>& informative = {});

// Parse a full instance document.  Throws std::invalid_argument on missing or
// malformed fields and re-validates the model invariants.
SerializedInstance instance_from_json(const std::string& text);

// Parse just {dim, actions} from a document (extra fields, including theta,
// are ignored).  Used by CLI subcommands that only need the action set.
ActionSet actions_from_json(const std::string& text);

// Designs serialize as {atoms: [[index, weight], ...]} together with the
// certificate fields objective, fw_gap and iterations.
std::string design_to_json(const DesignDistribution& design, const DesignCertificate& cert);

std::pair<DesignDistribution, DesignCertificate> design_from_json(const std::string& text);

}  // namespace sparsebandit
