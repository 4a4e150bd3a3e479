#include "atomcav/cli/run.hpp"

int main(int argc, char** argv) { return atomcav::cli::main_entry(argc, argv); }
