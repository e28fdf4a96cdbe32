import time


class Solution:
    def isPalindrome(self, x: int) -> bool:
        while True:
            time.sleep(1)
