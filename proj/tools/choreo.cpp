#include <cstdio>

int main() {
  std::puts("choreo: not wired up yet");
  return 2;
}
