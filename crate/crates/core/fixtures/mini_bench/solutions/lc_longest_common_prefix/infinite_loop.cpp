#include <chrono>
#include <thread>

class Solution {
public:
    string longestCommonPrefix(vector<string>& strs) {
        while (true) this_thread::sleep_for(chrono::seconds(1));
    }
};
