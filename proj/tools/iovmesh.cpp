#include <iovmesh/cli.hpp>

int main(int argc, char** argv) { return iovmesh::cli_main(argc, argv); }
