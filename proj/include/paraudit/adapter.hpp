#pragma once

#include "paraudit/run.hpp"

namespace paraudit {

// One completion backend. complete() either returns a terminal RunRecord or
// throws: TransientAdapterError is retried by the orchestrator, anything
// else fails the run.
class ProviderAdapter {
 public:
  virtual ~ProviderAdapter() = default;
  virtual RunRecord complete(const PlanEntry& entry) = 0;
};

}  // namespace paraudit
