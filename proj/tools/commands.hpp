#pragma once

namespace backoff::cli {

// Exit codes: 0 ok, 1 I/O failure, 2 usage or invalid parameters, 3 numeric failure.
int run(int argc, char** argv);

}  // namespace backoff::cli
