#include <chrono>
#include <thread>

class Solution {
public:
    bool isPalindrome(int x) {
        while (true) this_thread::sleep_for(chrono::seconds(1));
    }
};
