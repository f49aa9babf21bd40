#include "sllab/cli/run.hpp"

int main(int argc, char** argv) { return sllab::cli::run(argc, argv); }
