#include "dpp/cli.hpp"

int main(int argc, char** argv) { return dpp::cli_main(argc, argv); }
