#include "chelsea/cli.hpp"

int main(int argc, char** argv) {
    return chelsea::run_cli(argc, argv);
}
