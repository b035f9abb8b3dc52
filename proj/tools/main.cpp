#include "qsynth/cli.hpp"

int main(int argc, char** argv) { return qsynth::cli_main(argc, argv); }
