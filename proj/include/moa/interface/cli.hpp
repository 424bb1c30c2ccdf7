#pragma once

#include <ostream>

namespace moa {

/// The `moa` command line:
///
///   moa [--config deploy.json] ingest <kb_id> <dir> [--kb-dir DIR]
///   moa [--config deploy.json] query <pipeline_id> "<question>" [--mode serial|parallel] [--trace] [--json]
///   moa bench <suite.json> [--json]
///   moa [--config deploy.json] validate <pipeline.json>
///   moa --config deploy.json serve [--port N]
///
/// Returns 0 on success, 1 for config or validation errors and 2 for
/// runtime failures; errors are written to `err` as one JSON object.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace moa
