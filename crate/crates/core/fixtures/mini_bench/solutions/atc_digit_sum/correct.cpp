#include <iostream>
#include <string>

int main() {
    std::string s;
    std::cin >> s;
    long long t = 0;
    for (size_t i = 0; i < s.size(); ++i) t += s[i] - '0';
    std::cout << t << '\n';
}
