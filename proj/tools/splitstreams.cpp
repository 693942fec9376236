#include "splitstreams/cli.hpp"

int main(int argc, char** argv) { return splitstreams::cli::run(argc, argv); }
