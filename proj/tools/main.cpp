#include "shufflebench/experiment.hpp"

int main(int argc, char** argv) { return shufflebench::cli_main(argc, argv); }
