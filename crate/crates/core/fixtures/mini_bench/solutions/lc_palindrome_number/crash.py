class Solution:
    def isPalindrome(self, x: int) -> bool:
        raise ValueError('not implemented')
