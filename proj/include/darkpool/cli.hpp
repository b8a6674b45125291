#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include "darkpool/config.hpp"
#include "darkpool/contacts.hpp"
#include "darkpool/outbox.hpp"
#include "darkpool/transport.hpp"

namespace darkpool {

// Seams for tests and embedding. Unset members fall back to what the
// config describes.
struct CliEnvironment {
  std::function<std::unique_ptr<Transport>(const PipelineConfig&, const std::string& snapshot_id)>
      transport_factory;
  MailTransport* mail = nullptr;            // required for --live
  DeliverabilityProber* prober = nullptr;   // overrides contacts.prober
};

// Runs one subcommand. Prints a JSON summary on `out`; on failure prints a
// JSON error object on `err` and returns nonzero (1 pipeline error, 2 usage
// or configuration error).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const CliEnvironment& env = {});

}  // namespace darkpool
