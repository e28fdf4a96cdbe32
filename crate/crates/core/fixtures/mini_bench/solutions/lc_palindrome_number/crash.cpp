class Solution {
public:
    bool isPalindrome(int x) {
        throw runtime_error("not implemented");
    }
};
