#include <cstdio>

int main(int, char**) {
  std::fprintf(stderr, "semml: not wired up yet\n");
  return 2;
}
