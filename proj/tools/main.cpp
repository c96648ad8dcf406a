#include "commands.hpp"

int main(int argc, char** argv) { return backoff::cli::run(argc, argv); }
