import time


class Solution:
    def twoSum(self, nums: List[int], target: int) -> List[int]:
        while True:
            time.sleep(1)
