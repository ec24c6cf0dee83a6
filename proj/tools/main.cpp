#include "pdbrf/cli_run.hpp"

int main(int argc, char** argv) { return pdbrf::cli_main(argc, argv); }
