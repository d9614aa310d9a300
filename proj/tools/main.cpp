#include "clelab/experiment.hpp"

int main(int argc, char** argv) { return clelab::run_cli(argc, argv); }
