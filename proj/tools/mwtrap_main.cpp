#include "mwtrap/cli.hpp"

int main(int argc, char** argv) { return mwtrap::cli::run(argc, argv); }
