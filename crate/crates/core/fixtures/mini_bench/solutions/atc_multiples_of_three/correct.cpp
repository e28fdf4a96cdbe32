#include <iostream>

int main() {
    int n;
    std::cin >> n;
    int c = 0;
    for (int i = 1; i <= n; ++i)
        if (i % 3 == 0) ++c;
    std::cout << c << '\n';
}
