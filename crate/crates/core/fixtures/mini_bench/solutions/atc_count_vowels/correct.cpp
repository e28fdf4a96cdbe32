#include <iostream>
#include <string>

int main() {
    std::string s;
    std::cin >> s;
    int c = 0;
    for (size_t i = 0; i < s.size(); ++i)
        if (std::string("aeiou").find(s[i]) != std::string::npos) ++c;
    std::cout << c << '\n';
}
