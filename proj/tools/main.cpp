#include "ladderkit/cli.hpp"

int main(int argc, char** argv) { return ladderkit::cli::run(argc, argv); }
