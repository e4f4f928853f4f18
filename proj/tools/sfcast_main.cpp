#include "sfcast/cli.hpp"

int main(int argc, char** argv) { return sfcast::cli::run(argc, argv); }
